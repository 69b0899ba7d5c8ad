#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gfk/engine.hpp"
#include "gfk/error.hpp"
#include "gfk/observables.hpp"
#include "gfk/stats.hpp"

namespace gfk {

struct SlicePoint {
    double time = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    double ess = 0.0;       // effective sample size behind this estimate
    bool degenerate = false; // ess < kMinEffectiveSamples
};

struct ExpectationResult {
    std::vector<SlicePoint> slices;
    SlicePoint converged; // largest usable time
    RunDiagnostics diagnostics;
};

constexpr double kMinEffectiveSamples = 10.0;

namespace detail {

struct MergedSums {
    std::vector<std::vector<double>> per_block; // flattened block sums for jackknife
    SliceSums totals;
    std::vector<double> times;
    std::size_t n_obs = 0;
};

inline MergedSums merge_blocks(const std::vector<SliceSums>& blocks, const PathParams& params,
                               std::size_t n_obs) {
    MergedSums m;
    m.n_obs = n_obs;
    const auto steps = slice_steps(params);
    const int n = params.n_steps();
    for (int s : steps)
        m.times.push_back(params.total_time * (static_cast<double>(s) / static_cast<double>(n)));
    const std::size_t n_slices = steps.size();
    m.totals.resize(n_slices, n_obs);
    // layout per block: [w_run..][w_run_sq..][a_w..][w_full, w_full_sq, n_included]
    for (const auto& b : blocks) {
        std::vector<double> flat;
        flat.reserve(2 * n_slices + n_slices * n_obs + 3);
        for (double x : b.w_run) flat.push_back(x);
        for (double x : b.w_run_sq) flat.push_back(x);
        for (double x : b.a_w) flat.push_back(x);
        flat.push_back(b.w_full);
        flat.push_back(b.w_full_sq);
        flat.push_back(static_cast<double>(b.n_included));
        m.per_block.push_back(std::move(flat));

        for (std::size_t s = 0; s < n_slices; ++s) {
            m.totals.w_run[s] += b.w_run[s];
            m.totals.w_run_sq[s] += b.w_run_sq[s];
        }
        for (std::size_t j = 0; j < b.a_w.size(); ++j) m.totals.a_w[j] += b.a_w[j];
        m.totals.w_full += b.w_full;
        m.totals.w_full_sq += b.w_full_sq;
        m.totals.n_included += b.n_included;
    }
    return m;
}

} // namespace detail

/// Ratio estimator <A> = sum_paths A(Y(t1)) w / sum_paths w with the full-path
/// weight w = exp(-int_0^t V_p ds); observables are read at interior recording
/// slices. Errors are delete-one jackknife over path blocks.
template <class Trial, class V>
ExpectationResult gfk_expectation(const Trial& trial, const V& v, const Observable& obs,
                                  const PathParams& params, const Configuration& start,
                                  int workers = 0) {
    std::vector<SliceSums> blocks;
    std::vector<Observable> olist{obs};
    RunDiagnostics diag = run_ensemble(start, trial, v, params, olist, blocks, workers);
    if (diag.n_included < 1)
        throw Error(ErrorCode::AllWeightsDegenerate, "all paths excluded");
    auto merged = detail::merge_blocks(blocks, params, 1);

    double ess = merged.totals.w_full * merged.totals.w_full /
                 (merged.totals.w_full_sq > 0 ? merged.totals.w_full_sq : 1.0);
    if (ess < kMinEffectiveSamples)
        throw Error(ErrorCode::AllWeightsDegenerate,
                    "effective sample size " + std::to_string(ess) + " below threshold");

    const std::size_t n_slices = merged.times.size();
    ExpectationResult out;
    out.diagnostics = diag;
    for (std::size_t s = 0; s < n_slices; ++s) {
        if (merged.times[s] >= params.total_time) continue; // interior slices only
        std::size_t aw_index = 2 * n_slices + s; // a_w block offset, n_obs == 1
        std::size_t wf_index = 2 * n_slices + n_slices;
        auto est = jackknife(merged.per_block, [&](const std::vector<double>& t) {
            return t[aw_index] / t[wf_index];
        });
        SlicePoint p;
        p.time = merged.times[s];
        p.value = est.value;
        p.stderr_ = est.stderr_;
        p.ess = ess;
        out.slices.push_back(p);
    }
    if (out.slices.empty())
        throw Error(ErrorCode::InvalidParams,
                    "no interior recording slices; decrease record_every");
    out.converged = out.slices.back();
    return out;
}

/// Large-deviation energy estimate per slice time t:
///   E(t) = e0 - (1/t) ln( mean over paths of exp(log_weight(t)) ).
/// Slices whose running weights have collapsed (ess < 10) are flagged
/// degenerate rather than silently trusted; the estimate fails only when even
/// the first slice is degenerate.
template <class Trial, class V>
ExpectationResult energy_estimate(const Trial& trial, const V& v, const PathParams& params,
                                  const Configuration& start, int workers = 0) {
    std::vector<SliceSums> blocks;
    std::vector<Observable> olist; // weights only
    RunDiagnostics diag = run_ensemble(start, trial, v, params, olist, blocks, workers);
    if (diag.n_included < 1)
        throw Error(ErrorCode::AllWeightsDegenerate, "all paths excluded");
    auto merged = detail::merge_blocks(blocks, params, 0);

    const std::size_t n_slices = merged.times.size();
    const double e0 = trial.e0();
    ExpectationResult out;
    out.diagnostics = diag;
    for (std::size_t s = 0; s < n_slices; ++s) {
        double t = merged.times[s];
        std::size_t count_index = 2 * n_slices + 2; // n_included slot (n_obs == 0)
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
        out.slices.push_back(p);
    }
    if (out.slices.front().degenerate)
        throw Error(ErrorCode::AllWeightsDegenerate,
                    "running weights degenerate already at the first slice");
    out.converged = out.slices.front();
    for (const auto& p : out.slices)
        if (!p.degenerate) out.converged = p;
    return out;
}

/// Multi-time product estimator
///   < prod_k A_k(Y(t_k)) > = sum_paths prod_k A_k(Y(t_k)) w / sum_paths w.
/// Times must be strictly increasing and strictly inside (0, total_time).
template <class Trial, class V>
ValueWithError correlation_function(const Trial& trial, const V& v,
                                    const std::vector<std::pair<double, Observable>>& obs_times,
                                    const PathParams& params, const Configuration& start,
                                    int workers = 0) {
    if (obs_times.empty()) throw Error(ErrorCode::InvalidParams, "no observables given");
    const int n = params.n_steps();
    const double h = params.stepsize;
    std::vector<int> steps;
    double prev = 0.0;
    for (const auto& [t, o] : obs_times) {
        if (!(t > prev) || !(t < params.total_time))
            throw Error(ErrorCode::InvalidParams,
                        "observable times must increase strictly inside (0, total_time)");
        double x = t / h;
        long long k = std::llround(x);
        if (k < 1 || k >= n || std::abs(x - static_cast<double>(k)) > 1e-9)
            throw Error(ErrorCode::InvalidParams, "observable time off the step grid");
        steps.push_back(static_cast<int>(k));
        prev = t;
    }

    PathParams dense = params;
    dense.record_every = 1;
    std::vector<Observable> olist;
    for (const auto& [t, o] : obs_times) olist.push_back(o);

    struct CorrBlock {
        double num = 0.0, den = 0.0, den_sq = 0.0;
    };
    std::vector<CorrBlock> blocks(params.effective_blocks());
    run_blocked(dense, blocks, workers,
                [&](CorrBlock& b, RunDiagnostics& diag, std::int64_t, RngStream& rng) {
        WeightedPathResult r = run_path(start, trial, v, dense, olist, rng);
        diag.n_paths += 1;
        diag.n_restarts += r.restarts;
        if (r.excluded) {
            diag.n_excluded += 1;
            return;
        }
        diag.n_included += 1;
        double w = std::exp(r.log_weight);
        double prod = 1.0;
        for (std::size_t k = 0; k < steps.size(); ++k)
            prod *= r.slice_samples[static_cast<std::size_t>(steps[k] - 1)].observables[k];
        b.num += prod * w;
        b.den += w;
        b.den_sq += w * w;
    });

    double den = 0.0, den_sq = 0.0;
    for (const auto& b : blocks) { den += b.den; den_sq += b.den_sq; }
    double ess = den * den / (den_sq > 0 ? den_sq : 1.0);
    if (ess < kMinEffectiveSamples)
        throw Error(ErrorCode::AllWeightsDegenerate,
                    "effective sample size " + std::to_string(ess) + " below threshold");
    std::vector<double> nb, db;
    for (const auto& b : blocks) { nb.push_back(b.num); db.push_back(b.den); }
    return jackknife_ratio(nb, db);
}

} // namespace gfk
