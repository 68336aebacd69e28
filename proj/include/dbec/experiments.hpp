#pragma once

#include <string>
#include <vector>

#include "dbec/config.hpp"
#include "dbec/grid.hpp"

namespace dbec {

struct ExperimentCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;      // measured quantity
    double threshold = 0.0;  // bound it was compared against
};

/// One row of plot-ready long-format data (series, x, y).
struct SeriesPoint {
    std::string series;
    double x = 0.0;
    double y = 0.0;
};

struct ExperimentReport {
    std::string scenario;
    RunConfig config;  // fully resolved inputs
    std::vector<ExperimentCheck> checks;
    std::vector<SeriesPoint> series;
    std::vector<std::string> notes;
    std::vector<std::string> artifacts;  // paths written by write_report
    // scenario-specific CSV artifacts: file name -> content
    std::vector<std::pair<std::string, std::string>> extra_files;

    bool passed() const;
};

// Scenario runners. Each is deterministic given the config and reads the
// grid, parameters and lists from it; horizons and perturbation recipes are
// scenario-defined and recorded in the notes.
ExperimentReport run_instability(const RunConfig& cfg);
ExperimentReport run_trapped_stability(const RunConfig& cfg);
ExperimentReport run_gap_study(const RunConfig& cfg);
ExperimentReport run_mu_sign_study(const RunConfig& cfg);
ExperimentReport run_border_study(const RunConfig& cfg);
ExperimentReport run_small_mass_study(const RunConfig& cfg);
ExperimentReport run_regime_sweep(const RunConfig& cfg);

/// Dispatch by CLI name: instability, trapped-stability, gap, mu-sign,
/// border, small-mass, regime-sweep. ConfigError on an unknown name.
ExperimentReport run_experiment(const std::string& name, const RunConfig& cfg);

/// Writes report.json, series.csv and the resolved config echo into
/// out_dir, recording the paths in report.artifacts.
void write_report(ExperimentReport& report, const std::string& out_dir);

/// Squared Sigma norm ||u||^2 + A(u) + D(u) of any field.
double sigma_norm_sq(const WaveField& u);

/// Distance in the Sigma norm from psi to the phase orbit {e^{i theta} u},
/// minimized over theta in closed form.
double orbit_distance_sigma(const WaveField& psi, const WaveField& u);

} // namespace dbec
