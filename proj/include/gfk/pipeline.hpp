#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gfk/csv.hpp"
#include "gfk/engine.hpp"
#include "gfk/estimators.hpp"
#include "gfk/hylleraas.hpp"
#include "gfk/run_config.hpp"
#include "gfk/stats.hpp"
#include "gfk/thermo.hpp"
#include "gfk/trial.hpp"

namespace gfk {

struct PipelineOptions {
    std::string out_dir = ".";
    int workers = 0;
    bool emit_plots = false;
};

struct PipelineResult {
    std::vector<std::string> artifacts; // paths written, in order
    std::string summary;                // human-readable digest for stdout
};

struct ReferenceValue {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
};

inline std::vector<ReferenceValue> parse_reference_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::TrialFileMissing, path);
    std::vector<ReferenceValue> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        ReferenceValue r;
        if (!(ls >> r.name)) continue;
        if (!(ls >> r.value))
            throw Error(ErrorCode::ConfigInvalid, "reference line needs 'name value [stderr]'");
        ls >> r.stderr_;
        out.push_back(r);
    }
    return out;
}

namespace pipeline_detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

inline int derive_record_every(const RunConfig& cfg) {
    if (cfg.record_interval <= 0.0) return cfg.paths.record_every;
    double x = cfg.record_interval / cfg.paths.stepsize;
    long long k = std::llround(x);
    if (k < 1 || std::abs(x - static_cast<double>(k)) > 1e-9)
        throw Error(ErrorCode::ConfigInvalid,
                    "record_interval must be an integer number of steps");
    return static_cast<int>(k);
}

inline Configuration default_atom_start(int n_electrons) {
    Configuration c(n_electrons, 3);
    for (int i = 0; i < n_electrons; ++i) {
        double r = 0.5 + 0.5 * i;
        c.particle(i)[i % 3] = r;
        c.particle(i)[(i + 1) % 3] = 0.1 * (i + 1);
    }
    return c;
}

/// Per-slice energy and observable estimates from one ensemble pass.
struct AtomRun {
    std::vector<double> times;
    std::vector<SlicePoint> energy;                   // all slices
    std::vector<std::vector<SlicePoint>> observables; // [obs][interior slice]
    RunDiagnostics diagnostics;
    double total_time = 0.0;
};

template <class Trial, class V>
AtomRun atom_run(const Trial& trial, const V& v, const PathParams& params,
                 const std::vector<Observable>& obs, const Configuration& start, int workers) {
    std::vector<SliceSums> blocks;
    RunDiagnostics diag = run_ensemble(start, trial, v, params, obs, blocks, workers);
    if (diag.n_included < 1)
        throw Error(ErrorCode::AllWeightsDegenerate, "all paths excluded");
    auto merged = detail::merge_blocks(blocks, params, obs.size());

    AtomRun out;
    out.diagnostics = diag;
    out.total_time = params.total_time;
    out.times = merged.times;
    const std::size_t n_slices = merged.times.size();
    const std::size_t n_obs = obs.size();
    const double e0 = trial.e0();

    for (std::size_t s = 0; s < n_slices; ++s) {
        double t = merged.times[s];
        std::size_t count_index = 2 * n_slices + n_slices * n_obs + 2;
        auto est = jackknife(merged.per_block, [&, s, t](const std::vector<double>& tot) {
            return e0 - std::log(tot[s] / tot[count_index]) / t;
        });
        SlicePoint p;
        p.time = t;
        p.value = est.value;
        p.stderr_ = est.stderr_;
        p.ess = merged.totals.w_run[s] * merged.totals.w_run[s] /
                (merged.totals.w_run_sq[s] > 0 ? merged.totals.w_run_sq[s] : 1.0);
        p.degenerate = p.ess < kMinEffectiveSamples;
        out.energy.push_back(p);
    }

    if (out.energy.front().degenerate)
        throw Error(ErrorCode::AllWeightsDegenerate,
                    "running weights degenerate already at the first slice");

    double full_ess = merged.totals.w_full * merged.totals.w_full /
                      (merged.totals.w_full_sq > 0 ? merged.totals.w_full_sq : 1.0);
    if (n_obs > 0 && full_ess < kMinEffectiveSamples)
        throw Error(ErrorCode::AllWeightsDegenerate,
                    "full-path effective sample size " + std::to_string(full_ess) +
                        " below threshold");
    out.observables.resize(n_obs);
    for (std::size_t o = 0; o < n_obs; ++o) {
        for (std::size_t s = 0; s < n_slices; ++s) {
            if (merged.times[s] >= params.total_time) continue;
            std::size_t aw_index = 2 * n_slices + s * n_obs + o;
            std::size_t wf_index = 2 * n_slices + n_slices * n_obs;
            auto est = jackknife(merged.per_block, [&](const std::vector<double>& tot) {
                return tot[aw_index] / tot[wf_index];
            });
            SlicePoint p;
            p.time = merged.times[s];
            p.value = est.value;
            p.stderr_ = est.stderr_;
            p.ess = full_ess;
            p.degenerate = full_ess < kMinEffectiveSamples;
            out.observables[o].push_back(p);
        }
    }
    return out;
}

template <class Trial, class V>
PipelineResult run_atom_mode(const RunConfig& cfg, const PipelineOptions& opt, const Trial& trial,
                             const V& v, const Configuration& start) {
    PathParams params = cfg.paths;
    params.record_every = derive_record_every(cfg);

    std::vector<Observable> obs;
    for (const auto& name : cfg.observable_names) obs.push_back(observable_from_name(name));

    AtomRun run = atom_run(trial, v, params, obs, start, opt.workers);

    PipelineResult result;
    // (a) per-slice property table, paper-table shaped
    {
        std::vector<std::string> header{"time", "energy"};
        for (const auto& o : obs) header.push_back(o.name);
        header.push_back("provenance");
        CsvWriter w(header);
        for (std::size_t s = 0; s < run.times.size(); ++s) {
            std::vector<std::string> row;
            row.push_back(CsvWriter::cell(run.times[s]));
            row.push_back(format_parenthetical(run.energy[s].value, run.energy[s].stderr_));
            for (std::size_t o = 0; o < obs.size(); ++o) {
                const auto& col = run.observables[o];
                if (s < col.size())
                    row.push_back(format_parenthetical(col[s].value, col[s].stderr_));
                else
                    row.push_back(""); // endpoint slice: mid-path estimator undefined
            }
            row.push_back("mc");
            w.add_row(row);
        }
        std::string path = join_path(opt.out_dir, cfg.out_properties);
        w.write_file(path);
        result.artifacts.push_back(path);
    }
    // raw numeric long-format companion
    {
        CsvWriter w({"time", "quantity", "value", "stderr", "ess", "provenance"});
        for (std::size_t s = 0; s < run.times.size(); ++s)
            w.add_row({CsvWriter::cell(run.times[s]), "E", CsvWriter::cell(run.energy[s].value),
                       CsvWriter::cell(run.energy[s].stderr_), CsvWriter::cell(run.energy[s].ess),
                       "mc"});
        for (std::size_t o = 0; o < obs.size(); ++o)
            for (const auto& p : run.observables[o])
                w.add_row({CsvWriter::cell(p.time), obs[o].name, CsvWriter::cell(p.value),
                           CsvWriter::cell(p.stderr_), CsvWriter::cell(p.ess), "mc"});
        std::string path = join_path(opt.out_dir, cfg.out_properties_raw);
        w.write_file(path);
        result.artifacts.push_back(path);
    }
    // (b) summary with inverse-time extrapolation and optional reference rows
    {
        CsvWriter w({"property", "value", "stderr", "formatted", "provenance"});
        std::vector<FitPoint> pts;
        for (const auto& p : run.energy)
            if (!p.degenerate && p.stderr_ > 0.0) pts.push_back({p.time, p.value, p.stderr_});
        if (pts.size() >= 3) {
            FitResult fit = extrapolate_inverse_time(pts);
            double se = std::sqrt(fit.covariance[0][0]);
            w.add_row({"E_infinity", CsvWriter::cell(fit.e_infinity), CsvWriter::cell(se),
                       format_parenthetical(fit.e_infinity, se), "mc"});
        }
        const SlicePoint* e_last = &run.energy.front();
        for (const auto& p : run.energy)
            if (!p.degenerate) e_last = &p;
        w.add_row({"E", CsvWriter::cell(e_last->value), CsvWriter::cell(e_last->stderr_),
                   format_parenthetical(e_last->value, e_last->stderr_), "mc"});
        for (std::size_t o = 0; o < obs.size(); ++o) {
            if (run.observables[o].empty()) continue;
            const auto& p = run.observables[o].back();
            w.add_row({obs[o].name, CsvWriter::cell(p.value), CsvWriter::cell(p.stderr_),
                       format_parenthetical(p.value, p.stderr_), "mc"});
        }
        if (!cfg.reference_file.empty()) {
            auto refs = parse_reference_file(resolve_path(cfg, cfg.reference_file));
            for (const auto& r : refs)
                w.add_row({r.name, CsvWriter::cell(r.value), CsvWriter::cell(r.stderr_),
                           format_parenthetical(r.value, r.stderr_), "reference"});
        }
        std::string path = join_path(opt.out_dir, cfg.out_summary);
        w.write_file(path);
        result.artifacts.push_back(path);
    }

    std::ostringstream digest;
    digest << "atom_properties: " << run.energy.size() << " slices, "
           << run.diagnostics.n_included << "/" << run.diagnostics.n_paths << " paths included, "
           << run.diagnostics.n_restarts << " restarts\n";
    const SlicePoint& last = run.energy.back();
    digest << "  E(t=" << last.time << ") = "
           << format_parenthetical(last.value, last.stderr_)
           << (last.degenerate ? "  [degenerate]" : "") << "\n";
    result.summary = digest.str();
    return result;
}

struct HistBlock {
    std::vector<double> wsum;
    double wtot = 0.0;
};

/// Weighted endpoint-density histogram of the first oscillator coordinate.
inline PipelineResult write_endpoint_density(const RunConfig& cfg, const PipelineOptions& opt) {
    ThermoParams tp = make_thermo_params(cfg.temperature, cfg.n_oscillators, cfg.paths);
    tp.frequencies = cfg.frequencies;
    tp.importance_sampling = cfg.importance_sampling;
    tp.validate();

    const int n_bins = 80;
    const double lo = -4.0, hi = 4.0;
    const double width = (hi - lo) / n_bins;
    PathParams params = tp.paths;
    params.record_every = params.n_steps();
    const Configuration origin(tp.n_oscillators, 1);
    const HarmonicPotential pot(tp.omegas());
    const std::vector<Observable> none;
    const double beta = tp.beta();

    std::vector<HistBlock> blocks(params.effective_blocks());
    for (auto& b : blocks) b.wsum.assign(n_bins, 0.0);
    UnitTrial unit;
    GaussianTrial gauss(1.0, tp.n_oscillators);
    const bool is = tp.importance_sampling;
    run_blocked(params, blocks, opt.workers,
                [&](HistBlock& b, RunDiagnostics& d, std::int64_t, RngStream& rng) {
        WeightedPathResult r = is ? run_path(origin, gauss, pot, params, none, rng)
                                  : run_path(origin, unit, pot, params, none, rng);
        d.n_paths += 1;
        if (r.excluded) { d.n_excluded += 1; return; }
        d.n_included += 1;
        double logw = r.log_weight;
        if (is) {
            double end2 = 0.0;
            for (double x : r.final_config.coords) end2 += x * x;
            logw += -gauss.e0() * beta + 0.5 * end2;
        }
        double w = std::exp(logw);
        b.wtot += w;
        double x = r.final_config.coords[0];
        int bin = static_cast<int>(std::floor((x - lo) / width));
        if (bin >= 0 && bin < n_bins) b.wsum[bin] += w;
    });

    std::vector<double> wsum(n_bins, 0.0);
    double wtot = 0.0;
    for (const auto& b : blocks) {
        for (int i = 0; i < n_bins; ++i) wsum[i] += b.wsum[i];
        wtot += b.wtot;
    }

    CsvWriter w({"x", "density", "provenance"});
    const double var = std::tanh(beta); // weighted endpoint variance, unit frequency
    for (int i = 0; i < n_bins; ++i) {
        double x = lo + (i + 0.5) * width;
        w.add_row({CsvWriter::cell(x), CsvWriter::cell(wsum[i] / (wtot * width)), "mc"});
    }
    for (int i = 0; i < n_bins; ++i) {
        double x = lo + (i + 0.5) * width;
        double f = std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * 3.14159265358979323846 * var);
        w.add_row({CsvWriter::cell(x), CsvWriter::cell(f), "cameron_martin"});
    }
    PipelineResult r;
    std::string path = join_path(opt.out_dir, cfg.out_density);
    w.write_file(path);
    r.artifacts.push_back(path);
    return r;
}

} // namespace pipeline_detail

/// Executes one parsed configuration and writes its artifacts.
inline PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& opt = {}) {
    using namespace pipeline_detail;
    switch (cfg.mode) {
        case RunMode::AtomProperties: {
            if (cfg.trial_kind == BuiltinTrial::Gaussian) {
                GaussianTrial trial(cfg.gaussian_omega, cfg.gaussian_n_osc);
                HarmonicPotential pot(std::vector<double>(cfg.gaussian_n_osc, cfg.potential_omega));
                Configuration start(cfg.gaussian_n_osc, 1);
                return run_atom_mode(cfg, opt, trial, pot, start);
            }
            if (cfg.trial_kind == BuiltinTrial::Hydrogenic) {
                HydrogenicTrial trial(cfg.hydrogenic_z);
                CoulombPotential pot(cfg.hydrogenic_z, 1);
                Configuration start(1, 3);
                start.particle(0)[0] = 1.0;
                return run_atom_mode(cfg, opt, trial, pot, start);
            }
            HylleraasSpec spec = load_hylleraas_file(resolve_path(cfg, cfg.trial_file));
            HylleraasTrial trial(spec);
            CoulombPotential pot(spec.z, spec.n_electrons);
            return run_atom_mode(cfg, opt, trial, pot, default_atom_start(spec.n_electrons));
        }
        case RunMode::OscillatorThermo: {
            ThermoParams tp = make_thermo_params(cfg.temperature, cfg.n_oscillators, cfg.paths);
            tp.frequencies = cfg.frequencies;
            tp.importance_sampling = cfg.importance_sampling;
            ThermoReport rep = thermo_report(tp, opt.workers);
            CsvWriter w({"quantity", "provenance", "value", "stderr", "formatted"});
            for (const auto& q : rep.quantities) {
                w.add_row({q.name, "mc", CsvWriter::cell(q.mc_value), CsvWriter::cell(q.mc_stderr),
                           format_parenthetical(q.mc_value, q.mc_stderr)});
                if (q.cameron_martin)
                    w.add_row({q.name, "cameron_martin", CsvWriter::cell(*q.cameron_martin), "", ""});
                if (q.spectral)
                    w.add_row({q.name, "spectral", CsvWriter::cell(*q.spectral), "", ""});
                if (q.gaussian_moment)
                    w.add_row({q.name, "gaussian_moment", CsvWriter::cell(*q.gaussian_moment), "", ""});
            }
            PipelineResult result;
            std::string path = pipeline_detail::join_path(opt.out_dir, cfg.out_thermo);
            w.write_file(path);
            result.artifacts.push_back(path);
            if (opt.emit_plots) {
                auto extra = write_endpoint_density(cfg, opt);
                result.artifacts.insert(result.artifacts.end(), extra.artifacts.begin(),
                                        extra.artifacts.end());
            }
            std::ostringstream digest;
            digest << "oscillator_thermo at T=" << rep.temperature << " (beta=" << rep.beta
                   << ", M=" << rep.n_oscillators << ")\n";
            for (const auto& q : rep.quantities) {
                digest << "  " << q.name << " = " << format_parenthetical(q.mc_value, q.mc_stderr);
                if (q.cameron_martin) digest << "  [cameron_martin " << *q.cameron_martin << "]";
                digest << "\n";
            }
            result.summary = digest.str();
            return result;
        }
        case RunMode::TemperatureSweep: {
            auto rows = temperature_sweep(cfg.temperatures, cfg.n_oscillators, cfg.paths,
                                          opt.workers);
            CsvWriter w({"temperature", "beta", "quantity", "mc_value", "stderr", "oracle_value",
                         "oracle_name"});
            for (const auto& r : rows)
                w.add_row({CsvWriter::cell(r.temperature), CsvWriter::cell(r.beta), "U",
                           CsvWriter::cell(r.u_mc), CsvWriter::cell(r.u_stderr),
                           CsvWriter::cell(r.oracle_value), r.oracle_name});
            PipelineResult result;
            std::string path = pipeline_detail::join_path(opt.out_dir, cfg.out_sweep);
            w.write_file(path);
            result.artifacts.push_back(path);
            std::ostringstream digest;
            digest << "temperature_sweep over " << rows.size() << " temperatures, M="
                   << cfg.n_oscillators << "\n";
            for (const auto& r : rows)
                digest << "  T=" << r.temperature << "  U = "
                       << format_parenthetical(r.u_mc, r.u_stderr) << "  [oracle "
                       << r.oracle_value << "]\n";
            result.summary = digest.str();
            return result;
        }
        case RunMode::FluctuationTrace: {
            ThermoParams tp = make_thermo_params(cfg.temperature, 1, cfg.paths);
            tp.importance_sampling = cfg.importance_sampling;
            tp.validate();
            PathParams params = tp.paths;
            params.record_every = 1;
            Configuration origin(1, 1);
            HarmonicPotential pot(tp.omegas());
            std::vector<Observable> obs{
                Observable::custom("x", [](const Configuration& c) { return c.coords[0]; })};
            RngStream rng(params.seed, 0);
            WeightedPathResult r =
                tp.importance_sampling
                    ? run_path(origin, GaussianTrial(1.0, 1), pot, params, obs, rng)
                    : run_path(origin, UnitTrial{}, pot, params, obs, rng);
            CsvWriter w({"time", "x", "provenance"});
            for (const auto& s : r.slice_samples)
                w.add_row({CsvWriter::cell(s.time), CsvWriter::cell(s.observables[0]), "mc"});
            PipelineResult result;
            std::string path = pipeline_detail::join_path(opt.out_dir, cfg.out_trace);
            w.write_file(path);
            result.artifacts.push_back(path);
            if (opt.emit_plots) {
                auto extra = write_endpoint_density(cfg, opt);
                result.artifacts.insert(result.artifacts.end(), extra.artifacts.begin(),
                                        extra.artifacts.end());
            }
            std::ostringstream digest;
            digest << "fluctuation_trace at T=" << cfg.temperature << ": "
                   << r.slice_samples.size() << " steps\n";
            result.summary = digest.str();
            return result;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "unhandled mode");
}

} // namespace gfk
