#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "gfk/configuration.hpp"
#include "gfk/error.hpp"
#include "gfk/observables.hpp"
#include "gfk/rng.hpp"
#include "gfk/trial.hpp"

namespace gfk {

enum class StepKernel {
    GaussianIncrement,          // Normal(0, h) per coordinate
    FixedLengthRandomDirection, // random direction, length sqrt(d*h) per particle
};

struct PathParams {
    double stepsize = 1.0 / 30.0;
    double total_time = 1.0;
    std::int64_t n_paths = 1;
    std::uint64_t seed = 0;
    StepKernel kernel = StepKernel::GaussianIncrement;
    int record_every = 30;   // steps between recorded slices
    double drift_cap = 1.0;  // singularity guard on |drift|*h
    int n_blocks = 50;       // jackknife / reduction blocks
    int equilibration_steps = 0; // Metropolis moves toward phi0^2 before t=0
    double equilibration_scale = 0.5;
    int max_restarts = 1000;

    int n_steps() const {
        if (stepsize <= 0.0 || total_time <= 0.0)
            throw Error(ErrorCode::InvalidParams, "stepsize and total_time must be positive");
        double x = total_time / stepsize;
        long long n = std::llround(x);
        if (n < 1 || std::abs(x - static_cast<double>(n)) > 1e-9)
            throw Error(ErrorCode::InvalidParams,
                        "total_time must be an integer number of steps");
        return static_cast<int>(n);
    }

    int effective_blocks() const {
        return static_cast<int>(std::min<std::int64_t>(n_blocks, n_paths));
    }
};

/// Adds one diffusion increment; consumes the same number of draws for both
/// kernels of the same shape so step variants stay stream-compatible.
inline void add_increment(Configuration& c, double h, StepKernel kernel, RngStream& rng) {
    if (h == 0.0) return;
    const double sqrt_h = std::sqrt(h);
    if (kernel == StepKernel::GaussianIncrement) {
        for (double& x : c.coords) x += sqrt_h * rng.normal();
        return;
    }
    const int d = c.dim;
    const double len = std::sqrt(static_cast<double>(d) * h);
    for (int p = 0; p < c.n_particles; ++p) {
        double* xp = c.particle(p);
        if (d == 1) {
            xp[0] += (rng.uniform() < 0.5) ? -len : len;
            continue;
        }
        double dir[16];
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int k = 0; k < d; ++k) {
                dir[k] = rng.normal();
                norm2 += dir[k] * dir[k];
            }
        } while (norm2 == 0.0);
        double scale = len / std::sqrt(norm2);
        for (int k = 0; k < d; ++k) xp[k] += scale * dir[k];
    }
}

inline Configuration brownian_step(const Configuration& config, double h, RngStream& rng,
                                   StepKernel kernel = StepKernel::GaussianIncrement) {
    if (h < 0.0) throw Error(ErrorCode::InvalidParams, "negative stepsize");
    Configuration out = config;
    add_increment(out, h, kernel, rng);
    return out;
}

/// Euler-Maruyama update x <- x + drift(x) h + dW. The drift is evaluated at
/// the incoming configuration; a capped drift signals a node or Coulomb
/// singularity nearby.
template <class Trial>
Configuration drifted_step(const Configuration& config, const Trial& trial, double h,
                           RngStream& rng, double drift_cap = 1.0,
                           StepKernel kernel = StepKernel::GaussianIncrement) {
    if (h < 0.0) throw Error(ErrorCode::InvalidParams, "negative stepsize");
    std::vector<double> drift(config.coords.size());
    trial.derivs(config, drift.data());
    double norm2 = 0.0;
    for (double dcomp : drift) norm2 += dcomp * dcomp;
    if (std::sqrt(norm2) * h > drift_cap)
        throw Error(ErrorCode::DriftSingular, "drift step exceeds cap");
    Configuration out = config;
    add_increment(out, h, kernel, rng);
    for (std::size_t i = 0; i < out.coords.size(); ++i) out.coords[i] += drift[i] * h;
    return out;
}

struct SliceSample {
    int step = 0;
    double time = 0.0;
    double log_weight = 0.0; // accumulated over [0, time]
    std::vector<double> observables;
};

struct WeightedPathResult {
    Configuration final_config;
    double log_weight = 0.0; // -integral of V_p over the full path
    std::vector<SliceSample> slice_samples;
    bool excluded = false; // |log_weight| passed the overflow bound
    int restarts = 0;
};

namespace detail {

// Metropolis random walk targeting phi0^2; used to draw equilibrated starts.
template <class Trial>
Configuration equilibrate(const Configuration& start, const Trial& trial,
                          const PathParams& p, RngStream& rng) {
    Configuration cur = start;
    double val = 0.0;
    try { val = trial.value(cur); } catch (const Error&) { val = 0.0; }
    Configuration prop = cur;
    for (int s = 0; s < p.equilibration_steps; ++s) {
        prop = cur;
        for (double& x : prop.coords) x += p.equilibration_scale * rng.normal();
        double pv = 0.0;
        try { pv = trial.value(prop); } catch (const Error&) { pv = 0.0; }
        double ratio = (val == 0.0) ? 1.0 : (pv / val) * (pv / val);
        if (rng.uniform() < ratio && pv != 0.0) {
            cur = prop;
            val = pv;
        }
    }
    return cur;
}

} // namespace detail

constexpr double kLogWeightOverflow = 700.0;

/// Advances total_time/h drifted steps, accumulating the Feynman-Kac
/// log-weight -int V_p ds by the trapezoidal rule and recording observables
/// every record_every steps (and at the endpoint). A capped drift restarts
/// the path from its start with fresh randomness; |log w| > 700 flags the
/// path as excluded.
template <class Trial, class V>
WeightedPathResult run_path(const Configuration& start, const Trial& trial, const V& v,
                            const PathParams& params, const std::vector<Observable>& observables,
                            RngStream& rng) {
    const int n = params.n_steps();
    const double h = params.stepsize;
    const double e0 = trial.e0();
    const int rec = params.record_every > 0 ? params.record_every : n;

    Configuration origin = params.equilibration_steps > 0
                               ? detail::equilibrate(start, trial, params, rng)
                               : start;

    WeightedPathResult out;
    std::vector<double> drift(start.coords.size());
    std::vector<double> drift_new(start.coords.size());

    for (int attempt = 0;; ++attempt) {
        if (attempt > params.max_restarts)
            throw Error(ErrorCode::DriftSingular, "path restart limit exceeded");
        out.slice_samples.clear();
        out.log_weight = 0.0;
        out.excluded = false;

        Configuration cur = origin;
        bool restart = false;
        try {
            trial.derivs(cur, drift.data());
        } catch (const Error&) {
            // singular start: re-equilibrate if possible, otherwise give up
            if (params.equilibration_steps > 0) {
                origin = detail::equilibrate(start, trial, params, rng);
                out.restarts = attempt + 1;
                continue;
            }
            throw;
        }
        double norm2 = 0.0;
        for (double dcomp : drift) norm2 += dcomp * dcomp;
        if (std::sqrt(norm2) * h > params.drift_cap)
            throw Error(ErrorCode::DriftSingular, "drift singular at start configuration");
        double vp_prev = v(cur) - e0 - 0.5 * trial_lap_ratio(trial, cur);

        double logw = 0.0;
        for (int k = 1; k <= n; ++k) {
            Configuration next = cur;
            add_increment(next, h, params.kernel, rng);
            for (std::size_t i = 0; i < next.coords.size(); ++i) next.coords[i] += drift[i] * h;

            Derivs d;
            try {
                d = trial.derivs(next, drift_new.data());
            } catch (const Error&) {
                restart = true;
                break;
            }
            norm2 = 0.0;
            for (double dcomp : drift_new) norm2 += dcomp * dcomp;
            if (std::sqrt(norm2) * h > params.drift_cap) {
                restart = true;
                break;
            }
            double vp;
            try {
                vp = v(next) - e0 - 0.5 * d.lap_ratio;
            } catch (const Error&) {
                restart = true;
                break;
            }

            logw += -0.5 * h * (vp_prev + vp);
            vp_prev = vp;
            cur.coords.swap(next.coords);
            drift.swap(drift_new);

            if (std::abs(logw) > kLogWeightOverflow) {
                out.excluded = true;
                break;
            }
            if (k % rec == 0 || k == n) {
                SliceSample s;
                s.step = k;
                s.time = params.total_time * (static_cast<double>(k) / static_cast<double>(n));
                s.log_weight = logw;
                s.observables.reserve(observables.size());
                for (const auto& o : observables) s.observables.push_back(o.eval(cur));
                out.slice_samples.push_back(std::move(s));
            }
        }
        if (restart) {
            out.restarts = attempt + 1;
            continue;
        }
        out.log_weight = logw;
        out.final_config = std::move(cur);
        return out;
    }
}

struct RunDiagnostics {
    std::int64_t n_paths = 0;
    std::int64_t n_included = 0;
    std::int64_t n_excluded = 0;
    std::int64_t n_restarts = 0;

    void merge(const RunDiagnostics& o) {
        n_paths += o.n_paths;
        n_included += o.n_included;
        n_excluded += o.n_excluded;
        n_restarts += o.n_restarts;
    }
};

/// Per-block sufficient sums for every estimator: running-weight sums per
/// slice (energy), full-weight-correlated observable sums per slice (ratio
/// estimators), and full-weight totals.
struct SliceSums {
    std::vector<double> w_run;    // [slice]
    std::vector<double> w_run_sq; // [slice]
    std::vector<double> a_w;      // [slice * n_obs + o]
    double w_full = 0.0;
    double w_full_sq = 0.0;
    std::int64_t n_included = 0;

    void resize(std::size_t n_slices, std::size_t n_obs) {
        w_run.assign(n_slices, 0.0);
        w_run_sq.assign(n_slices, 0.0);
        a_w.assign(n_slices * n_obs, 0.0);
    }
};

/// Recorded slice steps for the given parameters (multiples of record_every
/// plus the endpoint).
inline std::vector<int> slice_steps(const PathParams& params) {
    const int n = params.n_steps();
    const int rec = params.record_every > 0 ? params.record_every : n;
    std::vector<int> steps;
    for (int k = rec; k <= n; k += rec) steps.push_back(k);
    if (steps.empty() || steps.back() != n) steps.push_back(n);
    return steps;
}

/// Blocked, order-stable parallel driver. Path i always uses stream i of the
/// seed, blocks own contiguous ascending index ranges, and within a block
/// paths are visited in ascending order by a single worker, so per-block
/// reductions are bit-identical for any worker count.
template <class Block, class PathFn>
RunDiagnostics run_blocked(const PathParams& params, std::vector<Block>& blocks, int workers,
                           PathFn&& per_path) {
    const std::int64_t n_paths = params.n_paths;
    if (n_paths < 1) throw Error(ErrorCode::InvalidParams, "n_paths must be positive");
    const int n_blocks = params.effective_blocks();
    if (static_cast<int>(blocks.size()) != n_blocks)
        throw Error(ErrorCode::InvalidParams, "block buffer size mismatch");
    std::vector<RunDiagnostics> diags(n_blocks);

    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<int>(workers, n_blocks);

    std::atomic<int> next_block{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&]() {
        try {
            for (;;) {
                int b = next_block.fetch_add(1);
                if (b >= n_blocks) return;
                std::int64_t lo = n_paths * b / n_blocks;
                std::int64_t hi = n_paths * (b + 1) / n_blocks;
                for (std::int64_t i = lo; i < hi; ++i) {
                    RngStream rng(params.seed, static_cast<std::uint64_t>(i));
                    per_path(blocks[b], diags[b], i, rng);
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    RunDiagnostics total;
    for (const auto& d : diags) total.merge(d);
    return total;
}

/// Runs n_paths weighted paths and reduces them into per-block slice sums.
template <class Trial, class V>
RunDiagnostics run_ensemble(const Configuration& start, const Trial& trial, const V& v,
                            const PathParams& params, const std::vector<Observable>& observables,
                            std::vector<SliceSums>& blocks, int workers = 0) {
    const std::size_t n_slices = slice_steps(params).size();
    const std::size_t n_obs = observables.size();
    blocks.assign(params.effective_blocks(), SliceSums{});
    for (auto& b : blocks) b.resize(n_slices, n_obs);

    return run_blocked(params, blocks, workers,
                       [&](SliceSums& sums, RunDiagnostics& diag, std::int64_t, RngStream& rng) {
        WeightedPathResult r = run_path(start, trial, v, params, observables, rng);
        diag.n_paths += 1;
        diag.n_restarts += r.restarts;
        if (r.excluded) {
            diag.n_excluded += 1;
            return;
        }
        diag.n_included += 1;
        sums.n_included += 1;
        double wf = std::exp(r.log_weight);
        sums.w_full += wf;
        sums.w_full_sq += wf * wf;
        for (std::size_t s = 0; s < r.slice_samples.size(); ++s) {
            const SliceSample& sl = r.slice_samples[s];
            double wr = std::exp(sl.log_weight);
            sums.w_run[s] += wr;
            sums.w_run_sq[s] += wr * wr;
            for (std::size_t o = 0; o < n_obs; ++o)
                sums.a_w[s * n_obs + o] += sl.observables[o] * wf;
        }
    });
}

} // namespace gfk
