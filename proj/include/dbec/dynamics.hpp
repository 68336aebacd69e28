#pragma once

#include <string>
#include <vector>

#include "dbec/functionals.hpp"
#include "dbec/grid.hpp"

namespace dbec {

enum class Verdict { Completed, BlowUpSuspected, ResolutionLost };

struct TrajectorySample {
    double t = 0.0;
    double mass = 0.0;
    double E = 0.0;         // E_a when a trap is present
    double A = 0.0;
    double B = 0.0;
    double D = 0.0;
    double Q = 0.0;         // Q_a when a trap is present
    double variance = 0.0;  // integral of |x|^2 |psi|^2
    double virial_residual = 0.0;  // filled post-run on interior samples
    double max_density = 0.0;
    double tail_fraction = 0.0;
};

struct TrajectoryRecord {
    std::vector<TrajectorySample> samples;
    Verdict verdict = Verdict::Completed;
    // populated when EvolveOptions::store_snapshots is set
    std::vector<WaveField> snapshots;
    std::vector<double> snapshot_times;
};

struct EvolveOptions {
    long sample_every = 10;
    bool store_snapshots = false;
    long snapshot_every = 0;         // 0 -> use sample_every
    std::string snapshots_dir = "";  // when non-empty, also written to disk
};

// Symmetric splitting: exact kinetic multiplier between two exact
// nonlinear-potential phase half-steps. Halts early with a verdict when the
// blow-up or boundary detectors fire.
TrajectoryRecord evolve(const WaveField& u0, const PhysParams& p, double dt,
                        double T, const EvolveOptions& opts = {});

// Max over interior samples of |V''(t) - 2 Q(t)| / (1 + |Q(t)|), with V''
// from central differences. Meaningful for untrapped runs.
double virial_check(const TrajectoryRecord& traj);

enum class Certificate { Certified, NotCertified };

// Sufficient condition for global existence of the free flow from u0:
// Q(u0) > 0 and E(u0) below the ground-state level, with a small guard band.
Certificate globality_certificate(const WaveField& u0, const PhysParams& p,
                                  double gamma_c);

struct ScatteringReport {
    std::vector<double> defects;  // consecutive-pair Cauchy defects
    double tail_defect = 0.0;
    WaveField psi_plus;           // last back-propagated state
};

// Back-propagates stored snapshots with the free group and reports the
// Cauchy defects of U(-t) psi(t); decay indicates scattering.
ScatteringReport scattering_diagnostic(const std::vector<WaveField>& snapshots,
                                       const std::vector<double>& times,
                                       const PhysParams& p);

} // namespace dbec
