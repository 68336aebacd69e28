#include "dbec/functionals.hpp"

#include <cmath>

namespace dbec {

void PhysParams::validate() const {
    if (!(mass_target > 0.0)) throw ConfigError("mass must be > 0");
    if (!(trap >= 0.0)) throw ConfigError("trap must be >= 0");
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2))
        throw ConfigError("lambda1/lambda2 must be finite");
}

Regime classify_regime(double lambda1, double lambda2) {
    double margin;
    if (lambda2 >= 0.0)
        margin = lambda1 - (4.0 * M_PI / 3.0) * lambda2;
    else
        margin = lambda1 + (8.0 * M_PI / 3.0) * lambda2;
    RegimeTag tag = RegimeTag::Stable;
    if (margin < 0.0) tag = RegimeTag::Unstable;
    else if (margin == 0.0) tag = RegimeTag::Border;
    return {tag, margin};
}

const char* regime_name(RegimeTag tag) {
    switch (tag) {
        case RegimeTag::Unstable: return "Unstable";
        case RegimeTag::Stable: return "Stable";
        case RegimeTag::Border: return "Border";
    }
    return "?";
}

EnergyBreakdown breakdown(const WaveField& u, const PhysParams& p) {
    require_finite(u, "breakdown input");
    const GridSpec& g = *u.grid;
    const double w = g.dv / static_cast<double>(g.size);

    EnergyBreakdown eb;
    // mass, D and the density in one physical-space pass
    WaveField rho(u.grid);
    for (int i3 = 0; i3 < g.n[2]; ++i3) {
        const double x3 = g.x_coord(2, i3);
        for (int i2 = 0; i2 < g.n[1]; ++i2) {
            const double x2 = g.x_coord(1, i2);
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double x1 = g.x_coord(0, i1);
                const std::size_t idx = g.index(i1, i2, i3);
                const double d = std::norm(u.data[idx]);
                rho.data[idx] = d;
                eb.mass += d;
                eb.D += (x1 * x1 + x2 * x2 + x3 * x3) * d;
            }
        }
    }
    eb.mass *= g.dv;
    eb.D *= g.dv;

    // A from the spectrum of u, B from the spectrum of |u|^2
    WaveField uhat = transform(u, TransformDirection::Forward);
    for (int i3 = 0; i3 < g.n[2]; ++i3) {
        const double q3 = g.xi[2][i3];
        for (int i2 = 0; i2 < g.n[1]; ++i2) {
            const double q2 = g.xi[1][i2];
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double q1 = g.xi[0][i1];
                eb.A += (q1 * q1 + q2 * q2 + q3 * q3) *
                        std::norm(uhat.data[g.index(i1, i2, i3)]);
            }
        }
    }
    eb.A *= w;

    WaveField rhohat = transform(rho, TransformDirection::Forward);
    const std::vector<double> K = dipolar_multiplier(g);
    for (std::size_t i = 0; i < g.size; ++i)
        eb.B += (p.lambda1 + p.lambda2 * K[i]) * std::norm(rhohat.data[i]);
    eb.B *= w;

    eb.E = 0.5 * eb.A + 0.5 * eb.B;
    eb.E_a = eb.E + 0.5 * p.trap * p.trap * eb.D;
    eb.Q = eb.A + 1.5 * eb.B;
    eb.Q_a = eb.A - p.trap * p.trap * eb.D + 1.5 * eb.B;
    eb.sigma_sq = eb.mass + eb.A + eb.D;
    if (eb.B < 0.0)
        eb.J = std::pow(eb.A, 1.5) * std::sqrt(eb.mass) / (-eb.B);
    return eb;
}

namespace {

// Periodic sinc interpolation weights for one axis: weight of source node j
// at target coordinate y, with the Nyquist mode symmetrized so real data
// stays real and on-grid targets reproduce nodal values exactly.
std::vector<double> interp_matrix(const GridSpec& g, int axis, double scale) {
    const int n = g.n[axis];
    const double L = g.L[axis];
    std::vector<double> M(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
        const double y = scale * g.x_coord(axis, a);
        // Targets outside the box sample a localized field where it is
        // negligible; zero them instead of wrapping in a periodic image.
        if (y < -L || y >= L) continue;
        for (int j = 0; j < n; ++j) {
            const double th = M_PI * (y - g.x_coord(axis, j)) / L;
            double s = 1.0 + std::cos(0.5 * n * th);
            for (int k = 1; k < n / 2; ++k) s += 2.0 * std::cos(k * th);
            M[static_cast<std::size_t>(a) * n + j] = s / n;
        }
    }
    return M;
}

void apply_axis(const GridSpec& g, int axis, const std::vector<double>& M,
                std::vector<cplx>& data, std::vector<cplx>& line_in,
                std::vector<cplx>& line_out) {
    const int n0 = g.n[0], n1 = g.n[1], n2 = g.n[2];
    const int n = g.n[axis];
    line_in.resize(n);
    line_out.resize(n);
    auto process = [&](auto index_of) {
        for (int j = 0; j < n; ++j) line_in[j] = data[index_of(j)];
        for (int a = 0; a < n; ++a) {
            const double* row = M.data() + static_cast<std::size_t>(a) * n;
            cplx acc = 0.0;
            for (int j = 0; j < n; ++j) acc += row[j] * line_in[j];
            line_out[a] = acc;
        }
        for (int a = 0; a < n; ++a) data[index_of(a)] = line_out[a];
    };
    if (axis == 0) {
        for (int i3 = 0; i3 < n2; ++i3)
            for (int i2 = 0; i2 < n1; ++i2)
                process([&](int j) { return g.index(j, i2, i3); });
    } else if (axis == 1) {
        for (int i3 = 0; i3 < n2; ++i3)
            for (int i1 = 0; i1 < n0; ++i1)
                process([&](int j) { return g.index(i1, j, i3); });
    } else {
        for (int i2 = 0; i2 < n1; ++i2)
            for (int i1 = 0; i1 < n0; ++i1)
                process([&](int j) { return g.index(i1, i2, j); });
    }
}

constexpr double kTailWarnThreshold = 1e-3;

} // namespace

WaveField dilate_field(const WaveField& u, const std::array<double, 3>& s,
                       double amp, double expected_mass) {
    require_finite(u, "dilate input");
    WaveField out = u;
    out.resolution_warning = false;
    std::vector<cplx> line_in, line_out;
    for (int axis = 0; axis < 3; ++axis) {
        if (s[axis] == 1.0) continue;
        const std::vector<double> M = interp_matrix(*u.grid, axis, s[axis]);
        apply_axis(*u.grid, axis, M, out.data, line_in, line_out);
    }
    scale_field(out, amp);
    const double m = discrete_mass(out);
    if (!(m > 0.0)) throw InvalidScale("rescaled field has zero mass");
    if (std::abs(m - expected_mass) > 1e-6 * expected_mass) out.resolution_warning = true;
    scale_field(out, std::sqrt(expected_mass / m));
    if (spectral_tail_fraction(out) > kTailWarnThreshold) out.resolution_warning = true;
    return out;
}

WaveField isotropic_rescale(const WaveField& u, double t) {
    if (!(t > 0.0)) throw InvalidScale("isotropic_rescale requires t > 0");
    if (t == 1.0) return u;
    return dilate_field(u, {t, t, t}, std::pow(t, 1.5), discrete_mass(u));
}

WaveField mass_rescale(const WaveField& u, double theta) {
    if (!(theta > 0.0)) throw InvalidScale("mass_rescale requires theta > 0");
    if (theta == 1.0) return u;
    const double s = 1.0 / theta;
    return dilate_field(u, {s, s, s}, 1.0 / std::sqrt(theta),
                        theta * theta * discrete_mass(u));
}

WaveField anisotropic_rescale(const WaveField& u, double t, AnisotropicVariant variant) {
    if (!(t > 0.0)) throw InvalidScale("anisotropic_rescale requires t > 0");
    if (t == 1.0) return u;
    std::array<double, 3> s;
    if (variant == AnisotropicVariant::Pancake)
        s = {t, t, std::sqrt(t)};
    else
        s = {std::pow(t, 0.75), std::pow(t, 0.75), t};
    return dilate_field(u, s, std::sqrt(s[0] * s[1] * s[2]), discrete_mass(u));
}

double t_star(const EnergyBreakdown& eb) {
    if (!(eb.B < 0.0)) throw NotDefocusable("t_star requires B < 0");
    return -2.0 * eb.A / (3.0 * eb.B);
}

double t_star(const WaveField& u, const PhysParams& p) {
    return t_star(breakdown(u, p));
}

double peak_level(const EnergyBreakdown& eb) {
    if (!(eb.B < 0.0)) throw NotDefocusable("peak_level requires B < 0");
    return (2.0 / 27.0) * eb.A * eb.A * eb.A / (eb.B * eb.B);
}

double peak_level(const WaveField& u, const PhysParams& p) {
    return peak_level(breakdown(u, p));
}

double weinstein(const WaveField& u, const PhysParams& p) {
    EnergyBreakdown eb = breakdown(u, p);
    if (!eb.J) throw NotDefocusable("weinstein requires B < 0");
    return *eb.J;
}

double heisenberg_residual(const WaveField& u, double omega) {
    if (!(omega > 0.0)) throw InvalidScale("heisenberg_residual requires omega > 0");
    EnergyBreakdown eb = breakdown(u, PhysParams{0.0, 0.0, 0.0, 1.0});
    return eb.A + omega * omega * eb.D - 3.0 * omega * eb.mass;
}

std::pair<double, double> nondimensionalize(const PhysicalInput& phys) {
    if (!(phys.h > 0.0) || !(phys.m > 0.0) || !(phys.N > 0.0))
        throw InvalidPhysical("h, m, N must be positive");
    const double gamma = std::sqrt(phys.m / phys.h);
    const double l1 = 4.0 * M_PI * phys.a_s * phys.N * gamma;
    const double l2 = phys.m * phys.N * phys.mu0 * phys.mu_dip * phys.mu_dip /
                      (4.0 * M_PI * phys.h * phys.h) * gamma;
    return {l1, l2};
}

double anisotropy_ratio(const WaveField& u) {
    const GridSpec& g = *u.grid;
    double m1 = 0.0, m3 = 0.0;
    for (int i3 = 0; i3 < g.n[2]; ++i3) {
        const double x3 = g.x_coord(2, i3);
        for (int i2 = 0; i2 < g.n[1]; ++i2) {
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double x1 = g.x_coord(0, i1);
                const double d = std::norm(u.data[g.index(i1, i2, i3)]);
                m1 += x1 * x1 * d;
                m3 += x3 * x3 * d;
            }
        }
    }
    return m3 / m1;
}

WaveField gaussian_field(GridPtr grid, const std::array<double, 3>& sigma, double c) {
    WaveField u(grid);
    const GridSpec& g = *grid;
    for (int i3 = 0; i3 < g.n[2]; ++i3) {
        const double x3 = g.x_coord(2, i3);
        for (int i2 = 0; i2 < g.n[1]; ++i2) {
            const double x2 = g.x_coord(1, i2);
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double x1 = g.x_coord(0, i1);
                u.data[g.index(i1, i2, i3)] =
                    std::exp(-0.5 * (x1 * x1 / (sigma[0] * sigma[0]) +
                                     x2 * x2 / (sigma[1] * sigma[1]) +
                                     x3 * x3 / (sigma[2] * sigma[2])));
            }
        }
    }
    const double m = discrete_mass(u);
    scale_field(u, std::sqrt(c / m));
    return u;
}

} // namespace dbec
