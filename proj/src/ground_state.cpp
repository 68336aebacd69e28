#include "dbec/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "dbec/errors.hpp"

namespace dbec {

namespace {

// A, B and the mean-field potential Phi = F^{-1}[(l1 + l2 Khat) F(|u|^2)],
// recomputed together since every solver step needs all three.
struct FieldState {
    double A = 0.0;
    double B = 0.0;
    WaveField uhat;
    WaveField phi;

    FieldState(const WaveField& u, const PhysParams& p,
               const std::vector<double>& K)
        : uhat(transform(u, TransformDirection::Forward)), phi(u.grid) {
        const GridSpec& g = *u.grid;
        const double w = g.dv / static_cast<double>(g.size);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const double q1 = g.xi[0][i1], q2 = g.xi[1][i2], q3 = g.xi[2][i3];
                    A += (q1 * q1 + q2 * q2 + q3 * q3) * std::norm(uhat.data[idx]);
                }
        A *= w;
        WaveField rho(u.grid);
        for (std::size_t i = 0; i < g.size; ++i) rho.data[i] = std::norm(u.data[i]);
        WaveField rhohat = transform(rho, TransformDirection::Forward);
        for (std::size_t i = 0; i < g.size; ++i) {
            const double mult = p.lambda1 + p.lambda2 * K[i];
            B += mult * std::norm(rhohat.data[i]);
            rhohat.data[i] *= mult;
        }
        B *= w;
        phi = transform(rhohat, TransformDirection::Inverse);
    }
};

double l2_inner(const WaveField& a, const WaveField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s * a.grid->dv;
}

void normalize_mass(WaveField& u, double c) {
    const double m = discrete_mass(u);
    if (!(m > 0.0)) throw NoDescentDirection("iterate lost all mass");
    scale_field(u, std::sqrt(c / m));
}

// Remove the component along u (tangent space of the mass sphere).
void project_tangent(WaveField& g, const WaveField& u, double c) {
    const double coef = l2_inner(g, u) / c;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= coef * u[i];
}

// Generator of mass-preserving dilations at u: (3/2) u + x . grad u.
// The reduced level is flat along this mode in the continuum, but grid
// truncation tilts it slightly toward narrowing; removing the mode from the
// descent direction keeps the iterate from creeping to unresolved widths.
WaveField dilation_mode(const WaveField& u, const WaveField& uhat) {
    const GridSpec& g = *u.grid;
    WaveField s(u.grid);
    for (std::size_t i = 0; i < g.size; ++i) s[i] = 1.5 * u[i];
    for (int axis = 0; axis < 3; ++axis) {
        WaveField dhat(u.grid);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const int k = (axis == 0) ? i1 : (axis == 1) ? i2 : i3;
                    dhat[idx] = cplx(0.0, g.xi[axis][k]) * uhat[idx];
                }
        WaveField deriv = transform(dhat, TransformDirection::Inverse);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const int k = (axis == 0) ? i1 : (axis == 1) ? i2 : i3;
                    s[idx] += g.x_coord(axis, k) * deriv[idx];
                }
    }
    return s;
}

// Remove the components along u and the dilation mode.
void project_constraints(WaveField& g, const WaveField& u, const WaveField& s,
                         double c) {
    const double suu = c;
    const double sus = l2_inner(u, s);
    const double sss = l2_inner(s, s);
    const double gu = l2_inner(g, u);
    const double gs = l2_inner(g, s);
    const double det = suu * sss - sus * sus;
    if (!(det > 1e-14 * suu * sss)) {  // degenerate: fall back to mass only
        project_tangent(g, u, c);
        return;
    }
    const double a = (sss * gu - sus * gs) / det;
    const double b = (suu * gs - sus * gu) / det;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= a * u[i] + b * s[i];
}

double reduced_level(double A, double B) {
    return (2.0 / 27.0) * A * A * A / (B * B);
}

// Overall scale of |u|^2: square root of the second moment per unit mass.
double rms_radius(const WaveField& u) {
    const GridSpec& g = *u.grid;
    double d = 0.0, m = 0.0;
    for (int i3 = 0; i3 < g.n[2]; ++i3) {
        const double z = g.x_coord(2, i3);
        for (int i2 = 0; i2 < g.n[1]; ++i2) {
            const double y = g.x_coord(1, i2);
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double x = g.x_coord(0, i1);
                const double r = std::norm(u.data[g.index(i1, i2, i3)]);
                d += (x * x + y * y + z * z) * r;
                m += r;
            }
        }
    }
    return std::sqrt(d / m);
}

void make_nonnegative(WaveField& u) {
    double s = 0.0;
    for (const auto& v : u.data) s += v.real();
    const double sign = (s < 0.0) ? -1.0 : 1.0;
    for (auto& v : u.data) v = sign * std::abs(v);
}

// Relative L2 defect of the stationary equation -1/2 Lap u + Phi u = beta u
// with the Rayleigh value beta = (A/2 + B)/mass.
double stationarity_defect(const WaveField& u, const FieldState& st, double m) {
    const GridSpec& g = *u.grid;
    WaveField kinhat = st.uhat;
    for (int i3 = 0; i3 < g.n[2]; ++i3)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double q1 = g.xi[0][i1], q2 = g.xi[1][i2], q3 = g.xi[2][i3];
                kinhat[g.index(i1, i2, i3)] *=
                    0.5 * (q1 * q1 + q2 * q2 + q3 * q3);
            }
    WaveField kin = transform(kinhat, TransformDirection::Inverse);
    const double beta = (0.5 * st.A + st.B) / m;
    double r2 = 0.0;
    for (std::size_t i = 0; i < g.size; ++i)
        r2 += std::norm(kin[i] + (st.phi[i].real() - beta) * u[i]);
    return std::sqrt(r2 * g.dv / m);
}

// Stabilized Petviashvili fixed-point iteration for the stationary equation
// (mu - Lap/2) u = -Phi u. The gradient flow above locates the right basin
// but its convergence test lives in the subspace orthogonal to the dilation
// mode, so the returned shape still carries an O(1e-2) stationarity defect;
// this polish removes it, which is what makes the state usable as initial
// data for time evolution. The multiplier is re-targeted between sweeps via
// the mass <-> mu^(-1/2) family scaling so the mass converges to c_target.
// Returns the relative defect at exit; restores the input if it fails to
// improve on it.
double petviashvili_polish(WaveField& u, const PhysParams& p,
                           const std::vector<double>& K, double c_target,
                           double target_defect, long max_sweeps) {
    const GridSpec& g = *u.grid;
    const WaveField backup = u;
    double entry_defect = 0.0;
    double best = 0.0;
    double mu_fix = 0.0;
    {
        FieldState st(u, p, K);
        const double m = discrete_mass(u);
        mu_fix = -(0.5 * st.A + st.B) / m;
        entry_defect = stationarity_defect(u, st, m);
        best = entry_defect;
    }
    if (!(mu_fix > 0.0)) return entry_defect;

    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        FieldState st(u, p, K);
        const double m = discrete_mass(u);
        const double defect = stationarity_defect(u, st, m);
        best = std::min(best, defect);
        if (std::getenv("DBEC_SOLVER_TRACE"))
            std::fprintf(stderr,
                         "polish sweep=%ld defect=%.3e m=%.12g mu=%.8g beta=%.9g M=%.9g\n",
                         sweep, defect, m, mu_fix,
                         (0.5 * st.A + st.B) / m,
                         (mu_fix * m + 0.5 * st.A) / (-st.B));
        if (defect <= target_defect &&
            std::abs(m - c_target) <= 1e-12 * c_target)
            return defect;
        if (!(st.B < 0.0) || !(mu_fix > 0.0)) break;

        WaveField nl(u.grid);
        for (std::size_t i = 0; i < g.size; ++i)
            nl[i] = -st.phi[i].real() * u[i];
        WaveField nlhat = transform(nl, TransformDirection::Forward);
        // M = <(mu - Lap/2)u, u> / <-Phi u, u>; equals 1 at the fixed point.
        const double M = (mu_fix * m + 0.5 * st.A) / (-st.B);
        if (!(M > 0.0)) break;
        const double stab = std::pow(M, 1.5);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const double q1 = g.xi[0][i1], q2 = g.xi[1][i2],
                                 q3 = g.xi[2][i3];
                    nlhat[idx] *= stab /
                        (mu_fix + 0.5 * (q1 * q1 + q2 * q2 + q3 * q3));
                }
        u = transform(nlhat, TransformDirection::Inverse);
        const double m_new = discrete_mass(u);
        if (!(m_new > 0.0)) break;
        mu_fix *= std::clamp((m_new / c_target) * (m_new / c_target), 0.25, 4.0);
    }

    FieldState st(u, p, K);
    const double m = discrete_mass(u);
    const double defect = stationarity_defect(u, st, m);
    if (!(defect < entry_defect) || !(m > 0.0) ||
        std::abs(m - c_target) > 1e-9 * c_target) {
        u = backup;
        return entry_defect;
    }
    return defect;
}

} // namespace

WaveField default_free_init(GridPtr grid, const PhysParams& p) {
    std::array<double, 3> sigma{1.0, 1.0, 1.0};
    if (p.lambda2 > 0.0) sigma = {1.0, 1.0, 2.0};
    else if (p.lambda2 < 0.0) sigma = {1.6, 1.6, 0.8};
    return gaussian_field(grid, sigma, p.mass_target);
}

WaveField default_trapped_init(GridPtr grid, const PhysParams& p) {
    const double s = 1.0 / std::sqrt(p.trap);
    return gaussian_field(grid, {s, s, s}, p.mass_target);
}

WaveField project_to_V(const WaveField& u, const PhysParams& p) {
    WaveField v = u;
    for (int pass = 0; pass < 80; ++pass) {
        EnergyBreakdown eb = breakdown(v, p);
        const double ts = t_star(eb);  // throws NotDefocusable when B >= 0
        if (std::abs(eb.Q) <= 1e-9 * eb.A || std::abs(ts - 1.0) < 1e-13) break;
        // Large dilations are applied in clamped steps: a single extreme
        // resampling can destroy a narrow state (and even flip the sign of
        // B through interpolation artifacts).
        const double t = std::clamp(ts, 0.5, 2.0);
        WaveField next = isotropic_rescale(v, t);
        if (breakdown(next, p).B >= 0.0) break;  // keep the last sound iterate
        v = std::move(next);
    }
    return v;
}

std::pair<WaveField, SolverReport>
solve_free_ground_state(GridPtr grid, const PhysParams& p,
                        const std::optional<WaveField>& init,
                        const SolverOptions& opts) {
    p.validate();
    const double c = p.mass_target;
    if (!opts.attempt_stable &&
        classify_regime(p.lambda1, p.lambda2).tag != RegimeTag::Unstable)
        throw NotUnstableRegime("free ground state requires the unstable regime");

    const double tol = opts.tol > 0.0 ? opts.tol : 1e-8;
    const std::vector<double> K = dipolar_multiplier(*grid);

    // Minimize at an internal working mass instead of the target mass: the
    // reduced level times the mass is exactly invariant under amplitude
    // scaling, so the minimization transfers between masses, while the
    // Q = 0 width (which grows like mass times coupling) can be kept O(1)
    // on the grid. Only the final projection happens at the target mass.
    double mag = std::abs(classify_regime(p.lambda1, p.lambda2).margin);
    if (mag < 1e-12) mag = std::abs(p.lambda1) + std::abs(p.lambda2);
    if (mag < 1e-12) mag = 1.0;
    double c_work = 9.0 / mag;

    WaveField u = init ? *init : default_free_init(grid, p);
    if (u.grid.get() != grid.get() &&
        (u.grid->n != grid->n || u.grid->L != grid->L))
        throw InvalidGrid("initial guess lives on a different grid");
    normalize_mass(u, c_work);

    // Find a starting point inside the B < 0 cone.
    if (breakdown(u, p).B >= 0.0) {
        bool found = false;
        for (double t : {1.5, 2.0, 3.0, 4.0, 6.0}) {
            WaveField cand = isotropic_rescale(u, t);
            if (breakdown(cand, p).B < 0.0) { u = std::move(cand); found = true; break; }
            if (p.lambda2 != 0.0) {
                // Positive dipolar coupling attracts head-to-tail: prolate
                // (cigar) shapes have B < 0; negative coupling favors oblate.
                cand = anisotropic_rescale(u, t,
                                           p.lambda2 > 0.0 ? AnisotropicVariant::Cigar
                                                           : AnisotropicVariant::Pancake);
                if (breakdown(cand, p).B < 0.0) { u = std::move(cand); found = true; break; }
            }
        }
        if (!found)
            throw NoDescentDirection("no dilation of the initial guess has B < 0");
    }

    SolverReport rep;
    rep.k_used = 0.0;
    double alpha = 0.1;
    bool converged = false;
    double residual = 0.0;
    long it = 0;
    WaveField backup = u;
    for (; it < opts.max_iters; ++it) {
        FieldState st(u, p, K);
        if (st.B >= 0.0) {
            // Near the regime border the B < 0 cone is narrow and an
            // accepted step can overshoot it; retreat and shorten the step.
            u = backup;
            alpha *= 0.5;
            if (alpha < 1e-14)
                throw NoDescentDirection("iterate left the B < 0 cone");
            continue;
        }
        backup = u;

        // Scale control. Two flat directions need pinning: the physical
        // width (the level is dilation-flat, but grid truncation tilts it
        // toward unresolved pixel widths) is held near a resolvable radius
        // by clamped coordinate dilations, and the virial scale t* is
        // recentered by adjusting the working mass through the amplitude,
        // which moves t* without moving the width.
        const double ts = -2.0 * st.A / (3.0 * st.B);
        const double width = rms_radius(u);
        bool rescaled = false;
        if (width < 1.02 || width > 1.42) {
            if (std::getenv("DBEC_SOLVER_TRACE"))
                std::fprintf(stderr, "it=%ld WIDTH rms=%.4f W=%.10f\n", it,
                             width, reduced_level(st.A, st.B));
            u = isotropic_rescale(u, std::clamp(width / 1.2, 0.8, 1.25));
            normalize_mass(u, c_work);
            rescaled = true;
        }
        if (ts < 0.98 || ts > 1.02) {
            if (std::getenv("DBEC_SOLVER_TRACE"))
                std::fprintf(stderr, "it=%ld MASS ts=%.4f c_work=%.4f\n", it,
                             ts, c_work);
            const double s2 = std::clamp(ts, 0.25, 4.0);
            scale_field(u, std::sqrt(s2));
            c_work *= s2;
            rescaled = true;
        }
        if (rescaled) continue;

        const double W = reduced_level(st.A, st.B);
        const double cA = (2.0 / 9.0) * st.A * st.A / (st.B * st.B);
        const double cB = -(4.0 / 27.0) * st.A * st.A * st.A / (st.B * st.B * st.B);

        // Gradient of the reduced level: cA * (-2 Lap u) + cB * (4 Phi u).
        WaveField nl(grid);
        for (std::size_t i = 0; i < nl.size(); ++i)
            nl[i] = 4.0 * cB * st.phi[i].real() * u[i];
        WaveField nlhat = transform(nl, TransformDirection::Forward);
        const GridSpec& g = *grid;
        WaveField ghat(grid);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const double q2 = g.xi[0][i1] * g.xi[0][i1] +
                                      g.xi[1][i2] * g.xi[1][i2] +
                                      g.xi[2][i3] * g.xi[2][i3];
                    ghat[idx] = 2.0 * cA * q2 * st.uhat[idx] + nlhat[idx];
                }
        WaveField grad = transform(ghat, TransformDirection::Inverse);
        const WaveField smode = dilation_mode(u, st.uhat);
        project_constraints(grad, u, smode, c_work);
        residual = std::sqrt(l2_inner(grad, grad));
        if (std::getenv("DBEC_SOLVER_TRACE"))
            std::fprintf(stderr, "it=%ld W=%.10f res=%.3e alpha=%.3e ts=%.4f A=%.4f\n",
                         it, W, residual, alpha, ts, st.A);
        if (residual <= tol) { converged = true; break; }

        // Preconditioned direction: divide by (1 + |xi|^2) in spectral space.
        WaveField dhat = transform(grad, TransformDirection::Forward);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const double q2 = g.xi[0][i1] * g.xi[0][i1] +
                                      g.xi[1][i2] * g.xi[1][i2] +
                                      g.xi[2][i3] * g.xi[2][i3];
                    dhat[idx] /= (1.0 + q2);
                }
        WaveField dir = transform(dhat, TransformDirection::Inverse);
        project_constraints(dir, u, smode, c_work);
        const double dd = l2_inner(grad, dir);  // > 0: descent direction

        // Near the minimum the sufficient-decrease test drops below the
        // roundoff noise of the level evaluation; switch to an unconditional
        // fixed-step flow there and monitor the residual instead.
        if (residual <= 1e-4) {
            const double af = std::min(alpha, 0.3);
            for (std::size_t i = 0; i < u.size(); ++i) u[i] -= af * dir[i];
            normalize_mass(u, c_work);
            continue;
        }

        // Trial steps may not sharply increase the spectral tail share; this
        // keeps the iterate out of the under-resolved pixel-scale region
        // where the discrete level is spuriously low.
        const double tail_cap = std::max(
            2.0 * spectral_tail_fraction_from_spectrum(g, st.uhat.data), 0.02);
        bool accepted = false;
        for (int bt = 0; bt < 40 && alpha > 1e-14; ++bt) {
            WaveField trial = u;
            for (std::size_t i = 0; i < trial.size(); ++i)
                trial[i] -= alpha * dir[i];
            normalize_mass(trial, c_work);
            EnergyBreakdown eb = breakdown(trial, p);
            if (eb.B < 0.0 &&
                reduced_level(eb.A, eb.B) <= W - 0.1 * alpha * dd &&
                spectral_tail_fraction(trial) < tail_cap) {
                u = std::move(trial);
                accepted = true;
                alpha = std::min(alpha * 1.3, 1.0);
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) { if (std::getenv("DBEC_SOLVER_TRACE")) std::fprintf(stderr, "it=%ld LS-FAIL\n", it); break; }
    }
    if (it >= opts.max_iters)
        throw MaxIterations("free ground state solver hit the iteration cap");

    make_nonnegative(u);
    normalize_mass(u, c_work);
    petviashvili_polish(u, p, K, c_work, std::min(tol, 1e-11), 400);
    normalize_mass(u, c_work);
    // Exact transfer of the level to the target mass, evaluated before the
    // final projection can leave the well-resolved width range.
    const double level_int = peak_level(breakdown(u, p));
    normalize_mass(u, c);
    u = project_to_V(u, p);
    make_nonnegative(u);  // strip interpolation ringing from the projection

    // When the target-mass state is still resolvable, polish it in place so
    // the returned field is a genuine critical point of the discrete energy
    // (and therefore stationary under the discrete time evolution); the
    // amplitude transfer from the working mass is not a symmetry of the
    // critical-point family, so without this the returned shape is only a
    // nearby Q = 0 point. The polished state is not re-projected onto Q = 0:
    // the discrete critical point carries a small Pohozaev defect from
    // spectral truncation (it vanishes with resolution), and dilating it
    // away would move the state off the critical manifold again. For
    // unresolvable targets only the level transfer above is meaningful and
    // the Q = 0 projection defines the output.
    double final_defect = -1.0;
    const double dx_max =
        std::max({grid->dx[0], grid->dx[1], grid->dx[2]});
    if (rms_radius(u) >= 3.0 * dx_max) {
        final_defect = petviashvili_polish(u, p, K, c, std::min(tol, 1e-11), 400);
        normalize_mass(u, c);
        make_nonnegative(u);  // strip FFT roundoff from the imaginary part
    }

    EnergyBreakdown eb = breakdown(u, p);
    rep.converged = converged;
    rep.iterations = it;
    rep.residual = final_defect >= 0.0 ? final_defect : residual;
    rep.level = level_int * (c_work / c);
    rep.gamma_lower = rep.level;
    rep.gamma_upper = rep.level;
    rep.mu = -(0.5 * eb.A + eb.B) / eb.mass;
    rep.q_residual = std::abs(eb.Q) / eb.A;
    rep.anisotropy = anisotropy_ratio(u);
    return {std::move(u), rep};
}

std::pair<WaveField, SolverReport>
solve_trapped_minimizer(GridPtr grid, const PhysParams& p,
                        const std::optional<WaveField>& init,
                        const SolverOptions& opts) {
    p.validate();
    if (!(p.trap > 0.0))
        throw ConfigError("trapped solver requires a > 0");
    const double c = p.mass_target;
    const double tol = opts.tol > 0.0 ? opts.tol : 1e-7;
    const std::vector<double> K = dipolar_multiplier(*grid);
    const GridSpec& g = *grid;

    WaveField u = init ? *init : default_trapped_init(grid, p);
    normalize_mass(u, c);

    const double k_used =
        opts.k > 0.0 ? opts.k
                     : 4.0 * breakdown(default_trapped_init(grid, p), p).A;

    // Harmonic potential table; the nonlinear part is rebuilt every step.
    std::vector<double> vtrap(g.size);
    for (int i3 = 0; i3 < g.n[2]; ++i3)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i1 = 0; i1 < g.n[0]; ++i1) {
                const double x1 = g.x_coord(0, i1), x2 = g.x_coord(1, i2),
                             x3 = g.x_coord(2, i3);
                vtrap[g.index(i1, i2, i3)] =
                    0.5 * p.trap * p.trap * (x1 * x1 + x2 * x2 + x3 * x3);
            }

    double dtau = opts.dtau;
    SolverReport rep;
    rep.k_used = k_used;
    bool converged = false;
    double residual = 0.0;
    long it = 0;
    std::vector<double> vloc(g.size);
    for (; it < opts.max_iters; ++it) {
        FieldState st(u, p, K);
        if (st.A >= 2.0 * k_used)
            throw BasinEscape("iterate kinetic energy reached the basin bound");
        // st.phi is already the full mean-field potential (local + dipolar).
        for (std::size_t i = 0; i < g.size; ++i)
            vloc[i] = vtrap[i] + st.phi[i].real();
        // Rayleigh quotient; shifting the flow by it makes the constrained
        // critical point an exact fixed point of the scheme (otherwise the
        // fixed point carries an O(dtau) bias and the residual plateaus).
        double vexp = 0.0;
        for (std::size_t i = 0; i < g.size; ++i)
            vexp += vloc[i] * std::norm(u[i]);
        const double mu_rq = (0.5 * st.A + vexp * g.dv) / c;
        if (dtau <= 0.0) {
            double vmax = 0.0;
            for (double v : vloc) vmax = std::max(vmax, std::abs(v));
            dtau = std::min(0.1, 0.8 / (vmax + 1.0));
        }

        // Residual of the constrained Euler-Lagrange equation.
        if (it % 10 == 0) {
            WaveField hu(grid);
            for (int i3 = 0; i3 < g.n[2]; ++i3)
                for (int i2 = 0; i2 < g.n[1]; ++i2)
                    for (int i1 = 0; i1 < g.n[0]; ++i1) {
                        const std::size_t idx = g.index(i1, i2, i3);
                        const double q2 = g.xi[0][i1] * g.xi[0][i1] +
                                          g.xi[1][i2] * g.xi[1][i2] +
                                          g.xi[2][i3] * g.xi[2][i3];
                        hu[idx] = 0.5 * q2 * st.uhat[idx];
                    }
            hu = transform(hu, TransformDirection::Inverse);
            for (std::size_t i = 0; i < g.size; ++i) hu[i] += vloc[i] * u[i];
            const double mu = l2_inner(hu, u) / c;
            double r2 = 0.0;
            for (std::size_t i = 0; i < g.size; ++i)
                r2 += std::norm(hu[i] - mu * u[i]);
            residual = std::sqrt(r2 * g.dv);
            if (residual <= tol) { converged = true; break; }
        }

        WaveField w(grid);
        for (std::size_t i = 0; i < g.size; ++i)
            w[i] = u[i] * (1.0 - dtau * (vloc[i] - mu_rq));
        WaveField what = transform(w, TransformDirection::Forward);
        for (int i3 = 0; i3 < g.n[2]; ++i3)
            for (int i2 = 0; i2 < g.n[1]; ++i2)
                for (int i1 = 0; i1 < g.n[0]; ++i1) {
                    const std::size_t idx = g.index(i1, i2, i3);
                    const double q2 = g.xi[0][i1] * g.xi[0][i1] +
                                      g.xi[1][i2] * g.xi[1][i2] +
                                      g.xi[2][i3] * g.xi[2][i3];
                    what[idx] /= (1.0 + 0.5 * dtau * q2);
                }
        u = transform(what, TransformDirection::Inverse);
        normalize_mass(u, c);
    }
    if (it >= opts.max_iters)
        throw MaxIterations("trapped minimizer solver hit the iteration cap");

    make_nonnegative(u);
    normalize_mass(u, c);

    EnergyBreakdown eb = breakdown(u, p);
    if (eb.A >= 2.0 * k_used)
        throw BasinEscape("converged state lies outside the kinetic basin");
    rep.converged = converged;
    rep.iterations = it;
    rep.residual = residual;
    rep.level = eb.E_a;
    rep.gamma_lower = eb.E_a;
    rep.gamma_upper = eb.E_a;
    rep.mu = lagrange_multiplier(u, p);
    rep.q_residual = std::abs(eb.Q_a) / eb.A;
    rep.anisotropy = anisotropy_ratio(u);
    return {std::move(u), rep};
}

double lagrange_multiplier(const WaveField& u, const PhysParams& p) {
    EnergyBreakdown eb = breakdown(u, p);
    return -(0.5 * eb.A + 0.5 * p.trap * p.trap * eb.D + eb.B) / eb.mass;
}

std::array<double, 2> estimate_gamma_a(const WaveField& u_c, const PhysParams& p) {
    PhysParams free = p;
    free.trap = 0.0;
    const double gamma_lower = breakdown(u_c, free).E;
    if (p.trap == 0.0) return {gamma_lower, gamma_lower};

    // E_a along the dilation path has its barrier near t = 1 (exactly t = 1
    // when a = 0); sample a bracket around it and keep the max.
    double gamma_upper = gamma_lower;
    for (int i = 0; i <= 50; ++i) {
        const double t = 0.6 + i * (1.6 - 0.6) / 50.0;
        WaveField v = (std::abs(t - 1.0) < 1e-9) ? u_c : isotropic_rescale(u_c, t);
        gamma_upper = std::max(gamma_upper, breakdown(v, p).E_a);
    }
    return {gamma_lower, gamma_upper};
}

} // namespace dbec
