#pragma once

#include <optional>
#include <utility>

#include "dbec/functionals.hpp"
#include "dbec/grid.hpp"

namespace dbec {

struct SolverOptions {
    double tol = 0.0;      // 0 -> solver default (1e-8 free, 1e-7 trapped)
    long max_iters = 50000;
    double k = 0.0;        // trapped kinetic basin bound, 0 -> auto
    double dtau = 0.0;     // trapped flow step, 0 -> auto
    bool attempt_stable = false;  // skip the regime precondition (free solver)
};

struct SolverReport {
    bool converged = false;
    long iterations = 0;
    double residual = 0.0;     // constrained-gradient L2 norm at exit
    double level = 0.0;        // E (free) or E_a (trapped) at the solution
    double gamma_lower = 0.0;
    double gamma_upper = 0.0;
    double mu = 0.0;
    double q_residual = 0.0;   // |Q|/A (free) or |Q_a|/A (trapped)
    double k_used = 0.0;
    double anisotropy = 0.0;   // <x3^2>/<x1^2>
};

// Default initial guesses: a Gaussian elongated along the dipole axis when
// the dipolar coupling favors it, the trap-matched Gaussian for the trapped
// flow. Mass is set to p.mass_target.
WaveField default_free_init(GridPtr grid, const PhysParams& p);
WaveField default_trapped_init(GridPtr grid, const PhysParams& p);

// Minimizes the scale-invariant reduced level (2/27) A^3/B^2 over the mass
// sphere by preconditioned projected gradient descent, then projects onto
// {Q = 0}. Requires the unstable regime unless opts.attempt_stable is set.
std::pair<WaveField, SolverReport>
solve_free_ground_state(GridPtr grid, const PhysParams& p,
                        const std::optional<WaveField>& init,
                        const SolverOptions& opts);

// Rescales u by t* so that Q vanishes (iterated until |Q|/A <= 1e-9 or the
// correction is at the roundoff level). Requires B(u) < 0.
WaveField project_to_V(const WaveField& u, const PhysParams& p);

// Semi-implicit normalized gradient flow for the trapped local minimizer.
// Aborts with BasinEscape if an accepted iterate reaches A >= 2k.
std::pair<WaveField, SolverReport>
solve_trapped_minimizer(GridPtr grid, const PhysParams& p,
                        const std::optional<WaveField>& init,
                        const SolverOptions& opts);

// mu * mass = -(A/2 + a^2 D/2 + B), valid for any critical point.
double lagrange_multiplier(const WaveField& u, const PhysParams& p);

// Two-sided bracket for the trapped mountain-pass level: lower bound is the
// free level E(u_c); upper bound is the maximum of E_a along the dilation
// path through u_c over a sampled t-range around t = 1.
std::array<double, 2> estimate_gamma_a(const WaveField& u_c, const PhysParams& p);

} // namespace dbec
