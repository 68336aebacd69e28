#ifndef DBEC_GRID_HPP
#define DBEC_GRID_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dbec/errors.hpp"

namespace dbec {

using cplx = std::complex<double>;

/// Periodic 3D computational box [-L_i, L_i) with n_i points per axis.
///
/// Transform convention: forward() is the plain unnormalized DFT, inverse()
/// carries the 1/(n1*n2*n3) factor. The continuum Fourier transform of a
/// field u is approximated by dv * DFT(u) up to a per-mode phase of unit
/// modulus, so the discrete Plancherel identity
///
///     sum |u|^2 dv  ==  (2pi)^-3 * sum |dv * DFT(u)|^2 dxi
///
/// holds exactly (dxi = product of pi/L_i wavenumber spacings).
///
/// Immutable after construction; safe to share across threads.
class GridSpec {
public:
    static std::shared_ptr<const GridSpec> make(const std::array<int, 3>& n,
                                                const std::array<double, 3>& L);
    ~GridSpec();
    GridSpec(const GridSpec&) = delete;
    GridSpec& operator=(const GridSpec&) = delete;

    std::array<int, 3> n;
    std::array<double, 3> L;
    std::array<double, 3> dx;
    double dv;         // volume element dx1*dx2*dx3
    double dxi;        // spectral volume element (pi/L1)(pi/L2)(pi/L3)
    std::size_t size;  // n1*n2*n3

    // Signed FFT-ordered wavenumber tables, xi[axis][k] = pi*k/L (k wraps
    // to negative past n/2).
    std::array<std::vector<double>, 3> xi;

    std::size_t index(int i1, int i2, int i3) const {
        return static_cast<std::size_t>(i1) +
               static_cast<std::size_t>(n[0]) *
                   (static_cast<std::size_t>(i2) +
                    static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(i3));
    }
    double x_coord(int axis, int idx) const { return -L[axis] + dx[axis] * idx; }

    // Unnormalized forward DFT, x-fastest layout; in and out must be
    // distinct buffers of length size.
    void forward(const cplx* in, cplx* out) const;
    // Inverse DFT including the 1/size normalization.
    void inverse(const cplx* in, cplx* out) const;

    bool same_shape(const GridSpec& other) const {
        return n == other.n && L == other.L;
    }

private:
    GridSpec() = default;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
};

using GridPtr = std::shared_ptr<const GridSpec>;

GridPtr make_grid(const std::array<int, 3>& n, const std::array<double, 3>& L);

/// Complex amplitude field on a GridSpec, x-fastest ordering.
struct WaveField {
    GridPtr grid;
    std::vector<cplx> data;
    // Soft warning set by rescale operations when the result is no longer
    // well represented on the grid.
    bool resolution_warning = false;

    WaveField() = default;
    explicit WaveField(GridPtr g) : grid(std::move(g)), data(grid->size) {}

    std::size_t size() const { return data.size(); }
    cplx& operator[](std::size_t i) { return data[i]; }
    const cplx& operator[](std::size_t i) const { return data[i]; }
};

enum class TransformDirection { Forward, Inverse };

bool all_finite(const WaveField& u);
void require_finite(const WaveField& u, const std::string& where);

/// Spectral transform between physical and spectral representations.
WaveField transform(const WaveField& u, TransformDirection dir);

/// The dipolar Fourier multiplier (4pi/3)(2 xi3^2 - xi1^2 - xi2^2)/|xi|^2,
/// sampled at the grid wavenumbers, with the zero mode set to 0.
std::vector<double> dipolar_multiplier(const GridSpec& grid);

double discrete_mass(const WaveField& u);
void scale_field(WaveField& u, double factor);

/// Share of spectral power |u_hat|^2 carried by modes whose index on some
/// axis reaches the top third of the resolved band. Used as an
/// under-resolution and blow-up indicator.
double spectral_tail_fraction(const WaveField& u);
double spectral_tail_fraction_from_spectrum(const GridSpec& grid, const std::vector<cplx>& uhat);

// Field snapshot file: magic "DBEC", version u32, n1 n2 n3 u32,
// L1 L2 L3 f64, then size interleaved (re,im) f64, little-endian, x-fastest.
void write_snapshot(const WaveField& u, const std::string& path);
WaveField read_snapshot(const std::string& path);

} // namespace dbec

#endif
