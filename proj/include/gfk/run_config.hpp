#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gfk/engine.hpp"
#include "gfk/error.hpp"
#include "gfk/observables.hpp"

namespace gfk {

enum class RunMode { AtomProperties, OscillatorThermo, TemperatureSweep, FluctuationTrace };

inline const char* run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::AtomProperties:   return "atom_properties";
        case RunMode::OscillatorThermo: return "oscillator_thermo";
        case RunMode::TemperatureSweep: return "temperature_sweep";
        case RunMode::FluctuationTrace: return "fluctuation_trace";
    }
    return "?";
}

enum class BuiltinTrial { Hylleraas, Gaussian, Hydrogenic };

/// Parsed run configuration (versioned, line-oriented key = value text with
/// [section] headers; '#' comments). See README for the schema.
struct RunConfig {
    int schema = 1;
    RunMode mode = RunMode::OscillatorThermo;

    PathParams paths;
    double record_interval = 0.0; // time units between recorded slices; 0 = derive

    // atom modes
    BuiltinTrial trial_kind = BuiltinTrial::Hylleraas;
    std::string trial_file;
    std::string reference_file;
    double gaussian_omega = 1.0;
    int gaussian_n_osc = 1;
    double hydrogenic_z = 1.0;
    double potential_omega = 1.0; // physical oscillator frequency for gaussian runs
    std::vector<std::string> observable_names;

    // oscillator modes
    double temperature = 2.0;
    std::vector<double> temperatures;
    int n_oscillators = 1;
    std::vector<double> frequencies;
    bool importance_sampling = false;

    // output names (relative to the out dir)
    std::string out_properties = "properties.csv";
    std::string out_properties_raw = "properties_raw.csv";
    std::string out_summary = "summary.csv";
    std::string out_thermo = "thermo_report.csv";
    std::string out_sweep = "sweep.csv";
    std::string out_trace = "trace.csv";
    std::string out_density = "endpoint_density.csv";

    std::string base_dir; // directory of the config file, for relative paths
};

namespace config_detail {

struct RawConfig {
    // section -> key -> value (sections and keys are unique)
    std::map<std::string, std::map<std::string, std::string>> kv;
};

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline RawConfig parse_raw(std::istream& in) {
    RawConfig raw;
    std::string line;
    std::string section; // "" = top level
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::ConfigInvalid,
                            "line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigInvalid,
                        "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": empty key");
        if (raw.kv[section].count(key))
            throw Error(ErrorCode::ConfigInvalid,
                        "duplicate key '" + key + "' in section [" + section + "]");
        raw.kv[section][key] = val;
    }
    return raw;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw Error(ErrorCode::ConfigInvalid, "key '" + key + "': not a number: '" + v + "'");
    }
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw Error(ErrorCode::ConfigInvalid, "key '" + key + "': not an integer: '" + v + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(ErrorCode::ConfigInvalid, "key '" + key + "': not a boolean: '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

} // namespace config_detail

/// Maps a table-column token (r_i^2, r_ij^-1, ...) to its observable.
inline Observable observable_from_name(const std::string& name) {
    auto parse_power = [&](const std::string& tail) -> int {
        try {
            std::size_t pos = 0;
            int p = std::stoi(tail, &pos);
            if (pos != tail.size()) throw std::invalid_argument("trailing");
            return p;
        } catch (...) {
            throw Error(ErrorCode::ConfigInvalid, "bad observable power in '" + name + "'");
        }
    };
    if (name.rfind("r_i^", 0) == 0) {
        int p = parse_power(name.substr(4));
        return p >= 0 ? Observable::power_of_ri(p) : Observable::inverse_power_of_ri(-p);
    }
    if (name.rfind("r_ij^", 0) == 0) {
        int p = parse_power(name.substr(5));
        return p >= 0 ? Observable::power_of_rij(p) : Observable::inverse_power_of_rij(-p);
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown observable '" + name + "'");
}

inline RunConfig parse_run_config(std::istream& in, const std::string& base_dir = "") {
    using namespace config_detail;
    RawConfig raw = parse_raw(in);
    RunConfig cfg;
    cfg.base_dir = base_dir;

    static const std::map<std::string, std::vector<std::string>> known = {
        {"", {"schema", "mode"}},
        {"paths", {"stepsize", "total_time", "time_grid", "n_paths", "seed", "kernel",
                   "record_interval", "blocks", "drift_cap", "equilibration_steps",
                   "equilibration_scale"}},
        {"system", {"trial", "trial_file", "reference_file", "omega", "n_osc", "z",
                    "potential_omega"}},
        {"observables", {"list"}},
        {"oscillator", {"temperature", "temperatures", "n_oscillators", "frequencies",
                        "importance_sampling"}},
        {"output", {"properties", "properties_raw", "summary", "thermo", "sweep", "trace",
                    "density"}},
    };
    for (const auto& [section, keys] : raw.kv) {
        auto it = known.find(section);
        if (it == known.end())
            throw Error(ErrorCode::ConfigInvalid, "unknown section [" + section + "]");
        for (const auto& [k, v] : keys) {
            bool ok = false;
            for (const auto& name : it->second) ok = ok || (name == k);
            if (!ok)
                throw Error(ErrorCode::ConfigInvalid,
                            "unknown key '" + k + "' in section [" + section + "]");
        }
    }

    auto get = [&](const std::string& section, const std::string& key) -> const std::string* {
        auto s = raw.kv.find(section);
        if (s == raw.kv.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    };

    const std::string* v;
    if (!(v = get("", "schema")))
        throw Error(ErrorCode::ConfigInvalid, "missing required key 'schema'");
    cfg.schema = static_cast<int>(to_int("schema", *v));
    if (cfg.schema != 1)
        throw Error(ErrorCode::ConfigInvalid, "unsupported schema version " + std::to_string(cfg.schema));
    if (!(v = get("", "mode")))
        throw Error(ErrorCode::ConfigInvalid, "missing required key 'mode'");
    if (*v == "atom_properties") cfg.mode = RunMode::AtomProperties;
    else if (*v == "oscillator_thermo") cfg.mode = RunMode::OscillatorThermo;
    else if (*v == "temperature_sweep") cfg.mode = RunMode::TemperatureSweep;
    else if (*v == "fluctuation_trace") cfg.mode = RunMode::FluctuationTrace;
    else throw Error(ErrorCode::ConfigInvalid, "unknown mode '" + *v + "'");

    if ((v = get("paths", "stepsize"))) cfg.paths.stepsize = to_double("stepsize", *v);
    if ((v = get("paths", "total_time"))) cfg.paths.total_time = to_double("total_time", *v);
    if ((v = get("paths", "time_grid"))) {
        auto items = split_list(*v);
        if (items.size() < 2)
            throw Error(ErrorCode::ConfigInvalid, "time_grid needs at least two times");
        std::vector<double> grid;
        for (const auto& s : items) grid.push_back(to_double("time_grid", s));
        double spacing = grid[1] - grid[0];
        if (spacing <= 0 || std::abs(grid[0] - spacing) > 1e-9)
            throw Error(ErrorCode::ConfigInvalid, "time_grid must be k*dt for k = 1..n");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (std::abs(grid[i] - grid[i - 1] - spacing) > 1e-9)
                throw Error(ErrorCode::ConfigInvalid, "time_grid must be uniformly spaced");
        cfg.paths.total_time = grid.back();
        cfg.record_interval = spacing;
    }
    if ((v = get("paths", "record_interval"))) cfg.record_interval = to_double("record_interval", *v);
    if (!(v = get("paths", "n_paths")))
        throw Error(ErrorCode::ConfigInvalid, "missing required key 'n_paths' in [paths]");
    cfg.paths.n_paths = to_int("n_paths", *v);
    if ((v = get("paths", "seed"))) cfg.paths.seed = static_cast<std::uint64_t>(to_int("seed", *v));
    if ((v = get("paths", "kernel"))) {
        if (*v == "gaussian") cfg.paths.kernel = StepKernel::GaussianIncrement;
        else if (*v == "fixed_length") cfg.paths.kernel = StepKernel::FixedLengthRandomDirection;
        else throw Error(ErrorCode::ConfigInvalid, "unknown kernel '" + *v + "'");
    }
    if ((v = get("paths", "blocks"))) cfg.paths.n_blocks = static_cast<int>(to_int("blocks", *v));
    if ((v = get("paths", "drift_cap"))) cfg.paths.drift_cap = to_double("drift_cap", *v);
    if ((v = get("paths", "equilibration_steps")))
        cfg.paths.equilibration_steps = static_cast<int>(to_int("equilibration_steps", *v));
    if ((v = get("paths", "equilibration_scale")))
        cfg.paths.equilibration_scale = to_double("equilibration_scale", *v);

    if ((v = get("system", "trial"))) {
        if (*v == "hylleraas") cfg.trial_kind = BuiltinTrial::Hylleraas;
        else if (*v == "gaussian") cfg.trial_kind = BuiltinTrial::Gaussian;
        else if (*v == "hydrogenic") cfg.trial_kind = BuiltinTrial::Hydrogenic;
        else throw Error(ErrorCode::ConfigInvalid, "unknown trial '" + *v + "'");
    }
    if ((v = get("system", "trial_file"))) cfg.trial_file = *v;
    if ((v = get("system", "reference_file"))) cfg.reference_file = *v;
    if ((v = get("system", "omega"))) cfg.gaussian_omega = to_double("omega", *v);
    if ((v = get("system", "n_osc"))) cfg.gaussian_n_osc = static_cast<int>(to_int("n_osc", *v));
    if ((v = get("system", "z"))) cfg.hydrogenic_z = to_double("z", *v);
    if ((v = get("system", "potential_omega"))) cfg.potential_omega = to_double("potential_omega", *v);

    if ((v = get("observables", "list")))
        cfg.observable_names = split_list(*v);

    if ((v = get("oscillator", "temperature"))) cfg.temperature = to_double("temperature", *v);
    if ((v = get("oscillator", "temperatures")))
        for (const auto& s : split_list(*v)) cfg.temperatures.push_back(to_double("temperatures", s));
    if ((v = get("oscillator", "n_oscillators")))
        cfg.n_oscillators = static_cast<int>(to_int("n_oscillators", *v));
    if ((v = get("oscillator", "frequencies")))
        for (const auto& s : split_list(*v)) cfg.frequencies.push_back(to_double("frequencies", s));
    if ((v = get("oscillator", "importance_sampling")))
        cfg.importance_sampling = to_bool("importance_sampling", *v);

    if ((v = get("output", "properties"))) cfg.out_properties = *v;
    if ((v = get("output", "properties_raw"))) cfg.out_properties_raw = *v;
    if ((v = get("output", "summary"))) cfg.out_summary = *v;
    if ((v = get("output", "thermo"))) cfg.out_thermo = *v;
    if ((v = get("output", "sweep"))) cfg.out_sweep = *v;
    if ((v = get("output", "trace"))) cfg.out_trace = *v;
    if ((v = get("output", "density"))) cfg.out_density = *v;

    if (cfg.paths.n_paths < 1)
        throw Error(ErrorCode::ConfigInvalid, "[paths] n_paths must be at least 1");
    if (cfg.mode == RunMode::AtomProperties && cfg.trial_kind == BuiltinTrial::Hylleraas &&
        cfg.trial_file.empty())
        throw Error(ErrorCode::ConfigInvalid, "atom_properties with hylleraas trial needs trial_file");
    if (cfg.mode == RunMode::TemperatureSweep && cfg.temperatures.empty())
        throw Error(ErrorCode::ConfigInvalid, "temperature_sweep needs [oscillator] temperatures");
    if (cfg.mode == RunMode::FluctuationTrace && cfg.n_oscillators != 1)
        throw Error(ErrorCode::ConfigInvalid, "fluctuation_trace expects a single oscillator");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file: " + path);
    std::string dir;
    auto slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash + 1);
    return parse_run_config(in, dir);
}

/// Resolves a config-relative path.
inline std::string resolve_path(const RunConfig& cfg, const std::string& p) {
    if (p.empty() || p.front() == '/' || cfg.base_dir.empty()) return p;
    return cfg.base_dir + p;
}

} // namespace gfk
