#pragma once

#include <array>
#include <string>
#include <vector>

#include "dbec/functionals.hpp"

namespace dbec {

/// Fully resolved run configuration. Every field maps 1:1 to a flat
/// key=value config line and to a CLI flag of the same name.
struct RunConfig {
    std::array<int, 3> n{64, 64, 64};
    std::array<double, 3> box{8.0, 8.0, 8.0};
    PhysParams params{-1.0, 0.3, 0.0, 1.0};

    // solver
    double tol = 0.0;         // 0 -> solver default
    long max_iters = 50000;
    double k = 0.0;           // trapped kinetic basin bound, 0 -> auto
    std::string init = "auto";  // "auto" or a snapshot path

    // dynamics
    double dt = 2e-3;
    double tmax = 1.0;
    long sample_every = 10;

    // experiment
    std::string experiment;
    std::vector<double> a_list{0.4, 0.2, 0.1, 0.05};
    std::vector<double> c_list{1.0, 0.5, 0.25, 0.1};
    std::vector<double> margin_list{-1.0, -0.75, -0.5};
    std::vector<double> perturbations{0.01, 0.05};
    int sweep_resolution = 21;

    // output
    std::string out_dir = ".";
    unsigned long seed = 0;

    void validate() const;  // throws ConfigError naming the offending key
};

/// Applies one key=value pair; unknown keys and malformed values are hard
/// errors (ConfigError with the key path).
void set_config_key(RunConfig& cfg, const std::string& key,
                    const std::string& value);

/// Flat key=value grammar: one pair per line, '#' starts a comment, blank
/// lines ignored. The result is validated.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);  // IoError if unreadable

/// Fully resolved echo in the same grammar, stable key order, floats with
/// 17 significant digits so a round-trip is lossless.
std::string config_echo(const RunConfig& cfg);

/// 17-significant-digit formatting used by all report writers.
std::string format_double(double v);

} // namespace dbec
