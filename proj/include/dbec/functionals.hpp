#ifndef DBEC_FUNCTIONALS_HPP
#define DBEC_FUNCTIONALS_HPP

#include <optional>
#include <utility>

#include "dbec/grid.hpp"

namespace dbec {

/// Dimensionless interaction strengths, trap frequency and target mass.
struct PhysParams {
    double lambda1 = -1.0;
    double lambda2 = 0.3;
    double trap = 0.0;         // a >= 0, a=0 means free case
    double mass_target = 1.0;  // c > 0

    void validate() const;
};

enum class RegimeTag { Unstable, Stable, Border };

struct Regime {
    RegimeTag tag;
    // lambda1 - (4pi/3) lambda2 when lambda2 >= 0, else lambda1 + (8pi/3) lambda2.
    double margin;
};

Regime classify_regime(double lambda1, double lambda2);

const char* regime_name(RegimeTag tag);

/// All scalar functionals of one field at one parameter set.
///
///   A = kinetic energy, B = interaction energy in Plancherel form,
///   D = trap second moment, E = A/2 + B/2, E_a = E + a^2 D / 2,
///   Q = A + (3/2)B, Q_a = A - a^2 D + (3/2)B,
///   J = A^{3/2} mass^{1/2} / (-B)  (only when B < 0),
///   sigma_sq = mass + A + D.
struct EnergyBreakdown {
    double mass = 0, A = 0, B = 0, D = 0;
    double E = 0, E_a = 0, Q = 0, Q_a = 0;
    std::optional<double> J;
    double sigma_sq = 0;
};

EnergyBreakdown breakdown(const WaveField& u, const PhysParams& p);

/// Coordinate dilation out(x) = amp * u(s1 x1, s2 x2, s3 x3) by per-axis
/// trigonometric interpolation, followed by exact renormalization of the
/// discrete mass to expected_mass. Sets resolution_warning on the result
/// when significant spectral mass ends up in the top third of the band.
WaveField dilate_field(const WaveField& u, const std::array<double, 3>& s,
                       double amp, double expected_mass);

/// u^t(x) = t^{3/2} u(t x); preserves mass, A -> t^2 A, B -> t^3 B, D -> t^-2 D.
WaveField isotropic_rescale(const WaveField& u, double t);

/// u_theta(x) = theta^{-1/2} u(x/theta); mass -> theta^2 mass, A invariant,
/// B -> theta B.
WaveField mass_rescale(const WaveField& u, double theta);

enum class AnisotropicVariant { Pancake, Cigar };

/// Pancake: t^{5/4} u(t x1, t x2, t^{1/2} x3)   (energy-descending for lambda2 > 0)
/// Cigar:   t^{5/4} u(t^{3/4} x1, t^{3/4} x2, t x3)   (for lambda2 < 0)
WaveField anisotropic_rescale(const WaveField& u, double t, AnisotropicVariant variant);

/// Unique t* > 0 with Q(u^{t*}) = 0, closed form -2A/(3B); requires B < 0.
double t_star(const WaveField& u, const PhysParams& p);
double t_star(const EnergyBreakdown& eb);

/// max_t E(u^t) = (2/27) A^3 / B^2; requires B < 0.
double peak_level(const WaveField& u, const PhysParams& p);
double peak_level(const EnergyBreakdown& eb);

/// Scale-invariant quotient A^{3/2} mass^{1/2} / (-B); requires B < 0.
double weinstein(const WaveField& u, const PhysParams& p);

/// A + omega^2 D - 3 omega mass; nonnegative up to quadrature error.
double heisenberg_residual(const WaveField& u, double omega);

struct PhysicalInput {
    double h = 0, m = 0, a_s = 0, N = 0, mu0 = 0, mu_dip = 0;
};

/// (lambda1, lambda2) from SI-coherent inputs:
/// lambda1 = 4 pi a_s N gamma, lambda2 = m N mu0 mu_dip^2 gamma / (4 pi h^2),
/// gamma = sqrt(m/h).
std::pair<double, double> nondimensionalize(const PhysicalInput& phys);

/// <x3^2> / <x1^2> of |u|^2; > 1 means elongation along the dipole axis.
double anisotropy_ratio(const WaveField& u);

/// Reference Gaussian amp * exp(-sum x_i^2/(2 sigma_i^2)), mass-normalized to c.
WaveField gaussian_field(GridPtr grid, const std::array<double, 3>& sigma, double c);

} // namespace dbec

#endif
