#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dbec/config.hpp"
#include "dbec/dynamics.hpp"
#include "dbec/errors.hpp"
#include "dbec/experiments.hpp"
#include "dbec/functionals.hpp"
#include "dbec/grid.hpp"
#include "dbec/ground_state.hpp"

namespace fs = std::filesystem;
using namespace dbec;

namespace {

// Every CLI flag maps 1:1 to a config key; values go through the same
// parser as the config file so validation and error text are identical.
struct KeyFlag {
    std::string key;
    std::string value;
    bool set = false;
};

void add_key_flag(CLI::App* app, std::vector<KeyFlag>& store,
                  const std::string& flag, const std::string& key,
                  const std::string& desc) {
    store.push_back({key, "", false});
    KeyFlag& kf = store.back();
    app->add_option_function<std::string>(
           flag,
           [&kf](const std::string& v) {
               kf.value = v;
               kf.set = true;
           },
           desc);
}

void apply_flags(RunConfig& cfg, const std::vector<KeyFlag>& store) {
    for (const auto& kf : store)
        if (kf.set) set_config_key(cfg, kf.key, kf.value);
    cfg.validate();
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "."
                                                      : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

void echo_config(const RunConfig& cfg) {
    write_text(fs::path(cfg.out_dir) / "config.txt", config_echo(cfg));
}

GridPtr grid_of(const RunConfig& cfg) { return make_grid(cfg.n, cfg.box); }

WaveField initial_state(const RunConfig& cfg, GridPtr grid) {
    if (cfg.init == "auto")
        return cfg.params.trap > 0.0
                   ? default_trapped_init(grid, cfg.params)
                   : default_free_init(grid, cfg.params);
    WaveField u = read_snapshot(cfg.init);
    if (!u.grid->same_shape(*grid))
        throw ConfigError("init: snapshot grid does not match n/L settings");
    return u;
}

int cmd_groundstate(const RunConfig& cfg, const std::string& out,
                    const std::string& report_path) {
    auto grid = grid_of(cfg);
    SolverOptions opts;
    opts.tol = cfg.tol;
    opts.max_iters = cfg.max_iters;
    opts.k = cfg.k;
    std::optional<WaveField> init;
    if (cfg.init != "auto") init = initial_state(cfg, grid);

    auto [u, rep] = cfg.params.trap > 0.0
                        ? solve_trapped_minimizer(grid, cfg.params, init, opts)
                        : solve_free_ground_state(grid, cfg.params, init, opts);

    echo_config(cfg);
    const fs::path snap =
        out.empty() ? fs::path(cfg.out_dir) / "state.dbec" : fs::path(out);
    fs::create_directories(snap.parent_path().empty() ? "."
                                                      : snap.parent_path());
    write_snapshot(u, snap.string());

    nlohmann::ordered_json j;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["residual"] = rep.residual;
    j["level"] = rep.level;
    j["gamma_lower"] = rep.gamma_lower;
    j["gamma_upper"] = rep.gamma_upper;
    j["mu"] = rep.mu;
    j["q_residual"] = rep.q_residual;
    j["k_used"] = rep.k_used;
    j["anisotropy"] = rep.anisotropy;
    const fs::path rp = report_path.empty()
                            ? fs::path(cfg.out_dir) / "report.json"
                            : fs::path(report_path);
    write_text(rp, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return rep.converged ? 0 : 2;
}

int cmd_evolve(const RunConfig& cfg, const std::string& in,
               const std::string& out, const std::string& snapshots_dir) {
    WaveField u0 = read_snapshot(in);
    EvolveOptions opts;
    opts.sample_every = cfg.sample_every;
    opts.snapshots_dir = snapshots_dir;
    opts.store_snapshots = !snapshots_dir.empty();
    TrajectoryRecord rec = evolve(u0, cfg.params, cfg.dt, cfg.tmax, opts);

    std::string csv =
        "t,mass,E,A,B,D,Q,variance,virial_residual,max_density,tail_fraction\n";
    for (const auto& s : rec.samples) {
        csv += format_double(s.t) + "," + format_double(s.mass) + "," +
               format_double(s.E) + "," + format_double(s.A) + "," +
               format_double(s.B) + "," + format_double(s.D) + "," +
               format_double(s.Q) + "," + format_double(s.variance) + "," +
               format_double(s.virial_residual) + "," +
               format_double(s.max_density) + "," +
               format_double(s.tail_fraction) + "\n";
    }
    echo_config(cfg);
    const fs::path csvp = out.empty() ? fs::path(cfg.out_dir) / "trajectory.csv"
                                      : fs::path(out);
    write_text(csvp, csv);

    const char* verdict = rec.verdict == Verdict::Completed ? "Completed"
                          : rec.verdict == Verdict::BlowUpSuspected
                              ? "BlowUpSuspected"
                              : "ResolutionLost";
    write_text(fs::path(cfg.out_dir) / "verdict.txt",
               std::string(verdict) + "\n");
    std::cout << "verdict = " << verdict << "\n";
    return 0;
}

int cmd_functionals(const RunConfig& cfg, const std::string& in) {
    WaveField u = read_snapshot(in);
    EnergyBreakdown eb = breakdown(u, cfg.params);
    nlohmann::ordered_json j;
    j["mass"] = eb.mass;
    j["A"] = eb.A;
    j["B"] = eb.B;
    j["D"] = eb.D;
    j["E"] = eb.E;
    j["E_a"] = eb.E_a;
    j["Q"] = eb.Q;
    j["Q_a"] = eb.Q_a;
    if (eb.J.has_value()) j["J"] = *eb.J;
    else j["J"] = nullptr;
    j["sigma_sq"] = eb.sigma_sq;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_experiment(RunConfig cfg, const std::string& name) {
    if (!name.empty()) cfg.experiment = name;
    if (cfg.experiment.empty())
        throw ConfigError("experiment: no scenario name given");
    ExperimentReport rep = run_experiment(cfg.experiment, cfg);
    write_report(rep, cfg.out_dir);
    std::cout << "scenario " << rep.scenario << ": "
              << (rep.passed() ? "pass" : "FAIL") << " ("
              << rep.checks.size() << " checks)\n";
    for (const auto& c : rep.checks)
        if (!c.passed)
            std::cout << "  FAIL " << c.name << " value=" << c.value
                      << " threshold=" << c.threshold << "\n";
    return rep.passed() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimensionless dipolar condensate laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    long threads = 1;
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--threads", threads, "reserved; computation is"
                                         " single-threaded")
        ->check(CLI::PositiveNumber);

    std::vector<KeyFlag> flags;
    flags.reserve(64);

    auto add_common = [&](CLI::App* sub) {
        add_key_flag(sub, flags, "--out-dir", "out_dir", "output directory");
        add_key_flag(sub, flags, "--seed", "seed", "deterministic seed");
        add_key_flag(sub, flags, "--lambda1", "lambda1", "contact coupling");
        add_key_flag(sub, flags, "--lambda2", "lambda2", "dipolar coupling");
        add_key_flag(sub, flags, "--trap", "trap", "trap frequency a >= 0");
    };

    auto add_grid = [&](CLI::App* sub) {
        add_key_flag(sub, flags, "--n1", "n1", "grid points, axis 1");
        add_key_flag(sub, flags, "--n2", "n2", "grid points, axis 2");
        add_key_flag(sub, flags, "--n3", "n3", "grid points, axis 3");
        add_key_flag(sub, flags, "--L1", "L1", "half box length, axis 1");
        add_key_flag(sub, flags, "--L2", "L2", "half box length, axis 2");
        add_key_flag(sub, flags, "--L3", "L3", "half box length, axis 3");
    };

    CLI::App* gs = app.add_subcommand("groundstate",
                                      "constrained ground-state solve");
    add_common(gs);
    add_grid(gs);
    add_key_flag(gs, flags, "--mass", "mass", "mass constraint c");
    add_key_flag(gs, flags, "--tol", "tol", "gradient tolerance");
    add_key_flag(gs, flags, "--max-iters", "max_iters", "iteration cap");
    add_key_flag(gs, flags, "--k", "k", "trapped kinetic basin bound");
    add_key_flag(gs, flags, "--init", "init", "'auto' or snapshot path");
    std::string gs_out, gs_report;
    gs->add_option("--out", gs_out, "state snapshot path");
    gs->add_option("--report", gs_report, "report JSON path");

    CLI::App* ev = app.add_subcommand("evolve", "time evolution from a"
                                                " snapshot");
    add_common(ev);
    add_key_flag(ev, flags, "--dt", "dt", "time step");
    add_key_flag(ev, flags, "--tmax", "tmax", "horizon");
    add_key_flag(ev, flags, "--sample-every", "sample_every",
                 "steps between samples");
    std::string ev_in, ev_out, ev_snaps;
    ev->add_option("--in", ev_in, "initial snapshot")->required();
    ev->add_option("--out", ev_out, "trajectory CSV path");
    ev->add_option("--snapshots-dir", ev_snaps, "also store field snapshots");

    CLI::App* fn = app.add_subcommand("functionals",
                                      "energy breakdown of a snapshot");
    add_common(fn);
    std::string fn_in;
    fn->add_option("--in", fn_in, "snapshot to analyse")->required();

    CLI::App* ex = app.add_subcommand("experiment", "scenario runner");
    add_common(ex);
    add_grid(ex);
    add_key_flag(ex, flags, "--mass", "mass", "mass constraint c");
    add_key_flag(ex, flags, "--tol", "tol", "gradient tolerance");
    add_key_flag(ex, flags, "--k", "k", "trapped kinetic basin bound");
    add_key_flag(ex, flags, "--dt", "dt", "time step");
    add_key_flag(ex, flags, "--tmax", "tmax", "horizon");
    add_key_flag(ex, flags, "--sample-every", "sample_every",
                 "steps between samples");
    add_key_flag(ex, flags, "--a-list", "a_list", "trap frequency list");
    add_key_flag(ex, flags, "--c-list", "c_list", "mass list");
    add_key_flag(ex, flags, "--margin-list", "margin_list",
                 "border margins (< 0)");
    add_key_flag(ex, flags, "--perturbations", "perturbations",
                 "relative perturbation sizes");
    add_key_flag(ex, flags, "--sweep-resolution", "sweep_resolution",
                 "regime sweep grid");
    std::string ex_name;
    ex->add_option("name", ex_name,
                   "instability | trapped-stability | gap | mu-sign | border"
                   " | small-mass | regime-sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config(config_path);
        apply_flags(cfg, flags);

        if (gs->parsed()) return cmd_groundstate(cfg, gs_out, gs_report);
        if (ev->parsed()) return cmd_evolve(cfg, ev_in, ev_out, ev_snaps);
        if (fn->parsed()) return cmd_functionals(cfg, fn_in);
        if (ex->parsed()) return cmd_experiment(cfg, ex_name);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
