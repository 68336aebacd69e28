#include "dbec/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dbec/errors.hpp"

namespace dbec {

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + v + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += format_double(xs[i]);
    }
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void set_config_key(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
    if (key == "n1") cfg.n[0] = static_cast<int>(parse_long(key, value));
    else if (key == "n2") cfg.n[1] = static_cast<int>(parse_long(key, value));
    else if (key == "n3") cfg.n[2] = static_cast<int>(parse_long(key, value));
    else if (key == "L1") cfg.box[0] = parse_double(key, value);
    else if (key == "L2") cfg.box[1] = parse_double(key, value);
    else if (key == "L3") cfg.box[2] = parse_double(key, value);
    else if (key == "lambda1") cfg.params.lambda1 = parse_double(key, value);
    else if (key == "lambda2") cfg.params.lambda2 = parse_double(key, value);
    else if (key == "trap") cfg.params.trap = parse_double(key, value);
    else if (key == "mass") cfg.params.mass_target = parse_double(key, value);
    else if (key == "tol") cfg.tol = parse_double(key, value);
    else if (key == "max_iters") cfg.max_iters = parse_long(key, value);
    else if (key == "k") cfg.k = parse_double(key, value);
    else if (key == "init") cfg.init = value;
    else if (key == "dt") cfg.dt = parse_double(key, value);
    else if (key == "tmax") cfg.tmax = parse_double(key, value);
    else if (key == "sample_every") cfg.sample_every = parse_long(key, value);
    else if (key == "experiment") cfg.experiment = value;
    else if (key == "a_list") cfg.a_list = parse_list(key, value);
    else if (key == "c_list") cfg.c_list = parse_list(key, value);
    else if (key == "margin_list") cfg.margin_list = parse_list(key, value);
    else if (key == "perturbations") cfg.perturbations = parse_list(key, value);
    else if (key == "sweep_resolution")
        cfg.sweep_resolution = static_cast<int>(parse_long(key, value));
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "seed")
        cfg.seed = static_cast<unsigned long>(parse_long(key, value));
    else throw ConfigError("unknown key '" + key + "'");
}

void RunConfig::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (n[i] < 8 || n[i] % 2 != 0)
            throw ConfigError("n" + std::to_string(i + 1) +
                              ": must be even and >= 8");
        if (!(box[i] > 0.0))
            throw ConfigError("L" + std::to_string(i + 1) + ": must be > 0");
    }
    if (params.trap < 0.0) throw ConfigError("trap must be >= 0");
    if (!(params.mass_target > 0.0)) throw ConfigError("mass must be > 0");
    if (tol < 0.0) throw ConfigError("tol must be >= 0");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (k < 0.0) throw ConfigError("k must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(tmax > 0.0)) throw ConfigError("tmax must be > 0");
    if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
    if (sweep_resolution < 2) throw ConfigError("sweep_resolution must be >= 2");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        set_config_key(cfg, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_echo(const RunConfig& cfg) {
    std::string s;
    auto kv = [&s](const std::string& k, const std::string& v) {
        s += k + " = " + v + "\n";
    };
    for (int i = 0; i < 3; ++i)
        kv("n" + std::to_string(i + 1), std::to_string(cfg.n[i]));
    for (int i = 0; i < 3; ++i)
        kv("L" + std::to_string(i + 1), format_double(cfg.box[i]));
    kv("lambda1", format_double(cfg.params.lambda1));
    kv("lambda2", format_double(cfg.params.lambda2));
    kv("trap", format_double(cfg.params.trap));
    kv("mass", format_double(cfg.params.mass_target));
    kv("tol", format_double(cfg.tol));
    kv("max_iters", std::to_string(cfg.max_iters));
    kv("k", format_double(cfg.k));
    kv("init", cfg.init);
    kv("dt", format_double(cfg.dt));
    kv("tmax", format_double(cfg.tmax));
    kv("sample_every", std::to_string(cfg.sample_every));
    kv("experiment", cfg.experiment);
    kv("a_list", join(cfg.a_list));
    kv("c_list", join(cfg.c_list));
    kv("margin_list", join(cfg.margin_list));
    kv("perturbations", join(cfg.perturbations));
    kv("sweep_resolution", std::to_string(cfg.sweep_resolution));
    kv("out_dir", cfg.out_dir);
    kv("seed", std::to_string(cfg.seed));
    return s;
}

} // namespace dbec
