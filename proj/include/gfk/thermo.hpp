#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfk/engine.hpp"
#include "gfk/error.hpp"
#include "gfk/stats.hpp"
#include "gfk/trial.hpp"

namespace gfk {

/// Finite-temperature run setup in oscillator units (hbar = omega = k_B = 1).
/// The path duration is the inverse temperature: t = beta = 1/T.
struct ThermoParams {
    double temperature = 1.0;
    int n_oscillators = 1;
    std::vector<double> frequencies; // empty means all 1
    PathParams paths;
    bool importance_sampling = false; // drifted OU sampling hook, default off

    double beta() const { return 1.0 / temperature; }

    std::vector<double> omegas() const {
        if (frequencies.empty()) return std::vector<double>(n_oscillators, 1.0);
        if (static_cast<int>(frequencies.size()) != n_oscillators)
            throw Error(ErrorCode::InvalidParams, "frequency list length != n_oscillators");
        return frequencies;
    }

    void validate() const {
        if (temperature <= 0.0) throw Error(ErrorCode::InvalidParams, "temperature must be positive");
        if (n_oscillators < 1) throw Error(ErrorCode::InvalidParams, "need at least one oscillator");
        if (std::abs(paths.total_time - beta()) > 1e-12 * std::max(1.0, beta()))
            throw Error(ErrorCode::InvalidParams, "path duration must equal beta = 1/T");
    }
};

inline ThermoParams make_thermo_params(double temperature, int n_oscillators, PathParams base) {
    ThermoParams p;
    p.temperature = temperature;
    p.n_oscillators = n_oscillators;
    base.total_time = 1.0 / temperature;
    p.paths = base;
    p.paths.n_steps(); // validate integer step count
    return p;
}

/// Closed forms for the unit-frequency oscillator (Brownian paths from the
/// origin): Z = 1/sqrt(cosh b), U = tanh(b)/2, C = b^2 / (2 cosh^2 b).
struct CameronMartin {
    double z = 1.0;
    double u = 0.0;
    double c = 0.0;
};

inline CameronMartin cameron_martin(double beta, double omega = 1.0) {
    if (beta < 0.0) throw Error(ErrorCode::InvalidParams, "beta must be nonnegative");
    CameronMartin r;
    double ob = omega * beta;
    r.z = 1.0 / std::sqrt(std::cosh(ob));
    r.u = 0.5 * omega * std::tanh(ob);
    double ch = std::cosh(ob);
    r.c = 0.5 * ob * ob / (ch * ch);
    return r;
}

/// Endpoint-moment value of the Eq-28-style estimator for the exact weighted
/// Gaussian endpoint law: C = 0.5 beta^2 omega^2 tanh^2(omega beta).
inline double gaussian_moment_specific_heat(double beta, double omega = 1.0) {
    double t = std::tanh(omega * beta);
    return 0.5 * beta * beta * omega * omega * t * t;
}

struct SpectralValues {
    double z = 0.0;
    double u = 0.0;
    double c = 0.0;
    double f = 0.0;
};

/// Direct spectral sums over eps_n = omega (n + 1/2) at temperature T.
inline SpectralValues spectral_oracle(double temperature, int n_levels, double omega = 1.0) {
    if (temperature <= 0.0 || omega <= 0.0 || n_levels < 1)
        throw Error(ErrorCode::InvalidParams, "bad spectral oracle arguments");
    double z = 0.0, s1 = 0.0, s2 = 0.0;
    for (int n = 0; n < n_levels; ++n) {
        double eps = omega * (n + 0.5);
        double w = std::exp(-eps / temperature);
        z += w;
        s1 += eps * w;
        s2 += eps * eps * w;
    }
    double tail = std::exp(-omega * (n_levels + 0.5) / temperature) /
                  (1.0 - std::exp(-omega / temperature));
    if (tail > 1e-12 * z)
        throw Error(ErrorCode::TruncationInsufficient, "spectral sum tail above 1e-12");
    SpectralValues r;
    r.z = z;
    r.u = s1 / z;
    double beta = 1.0 / temperature;
    r.c = beta * beta * (s2 / z - r.u * r.u);
    r.f = -temperature * std::log(z);
    return r;
}

inline ValueWithError free_energy(double z, double z_stderr, double beta) {
    if (z <= 0.0) throw Error(ErrorCode::NonpositiveZ, "partition function must be positive");
    if (beta <= 0.0) throw Error(ErrorCode::InvalidParams, "beta must be positive");
    return {-std::log(z) / beta, z_stderr / (beta * z)};
}

namespace detail {

struct ThermoBlock {
    double w = 0.0, w_sq = 0.0;
    double ew = 0.0, e2w = 0.0;
    std::int64_t n = 0;
};

struct ThermoSums {
    std::vector<std::vector<double>> per_block;
    double w = 0.0, w_sq = 0.0;
    std::int64_t n = 0;
    RunDiagnostics diag;
};

/// One ensemble pass: Brownian (or drifted, when the importance hook is on)
/// paths from the origin, weight exp(-int V ds), endpoint energy functional
/// eps(x) = sum_i omega_i^2 x_i^2 / 2.
inline ThermoSums thermo_pass(const ThermoParams& tp, int workers) {
    tp.validate();
    const auto omegas = tp.omegas();
    const HarmonicPotential pot(omegas);
    PathParams params = tp.paths;
    params.record_every = params.n_steps(); // endpoint only
    const Configuration origin(tp.n_oscillators, 1);
    const std::vector<Observable> none;
    const double beta = tp.beta();

    if (tp.importance_sampling)
        for (double w : omegas)
            if (w != 1.0)
                throw Error(ErrorCode::InvalidParams,
                            "importance-sampling hook supports unit frequencies only");

    std::vector<ThermoBlock> blocks(params.effective_blocks());
    RunDiagnostics diag;
    auto reduce = [&](ThermoBlock& b, const WeightedPathResult& r, double log_w) {
        double w = std::exp(log_w);
        double eps = pot(r.final_config);
        b.w += w;
        b.w_sq += w * w;
        b.ew += eps * w;
        b.e2w += eps * eps * w;
        b.n += 1;
    };

    if (!tp.importance_sampling) {
        UnitTrial trial;
        diag = run_blocked(params, blocks, workers,
                           [&](ThermoBlock& b, RunDiagnostics& d, std::int64_t, RngStream& rng) {
            WeightedPathResult r = run_path(origin, trial, pot, params, none, rng);
            d.n_paths += 1;
            d.n_restarts += r.restarts;
            if (r.excluded) { d.n_excluded += 1; return; }
            d.n_included += 1;
            reduce(b, r, r.log_weight);
        });
    } else {
        GaussianTrial trial(1.0, tp.n_oscillators);
        const double e0 = trial.e0();
        diag = run_blocked(params, blocks, workers,
                           [&](ThermoBlock& b, RunDiagnostics& d, std::int64_t, RngStream& rng) {
            WeightedPathResult r = run_path(origin, trial, pot, params, none, rng);
            d.n_paths += 1;
            d.n_restarts += r.restarts;
            if (r.excluded) { d.n_excluded += 1; return; }
            d.n_included += 1;
            // exp(-int U) phi(x0)/phi(Y_end): log w' = log w - e0 beta + sum x_end^2/2
            double end2 = 0.0;
            for (double x : r.final_config.coords) end2 += x * x;
            reduce(b, r, r.log_weight - e0 * beta + 0.5 * end2);
        });
    }

    ThermoSums s;
    s.diag = diag;
    for (const auto& b : blocks) {
        s.per_block.push_back({b.w, b.w_sq, b.ew, b.e2w, static_cast<double>(b.n)});
        s.w += b.w;
        s.w_sq += b.w_sq;
        s.n += b.n;
    }
    if (s.n < 1) throw Error(ErrorCode::AllWeightsDegenerate, "all paths excluded");
    return s;
}

} // namespace detail

/// Z(beta) = E[ exp(-int_0^beta V ds) ] over Brownian paths from the origin.
inline ValueWithError partition_function_mc(const ThermoParams& tp, int workers = 0) {
    auto s = detail::thermo_pass(tp, workers);
    return jackknife(s.per_block, [](const std::vector<double>& t) { return t[0] / t[4]; });
}

/// Weighted-ratio estimator of the endpoint energy functional; for M
/// oscillators this is the sum of per-oscillator values.
inline ValueWithError internal_energy_mc(const ThermoParams& tp, int workers = 0) {
    auto s = detail::thermo_pass(tp, workers);
    return jackknife(s.per_block, [](const std::vector<double>& t) { return t[2] / t[0]; });
}

/// beta^2-scaled endpoint variance: beta^2 ( <eps^2>_w - <eps>_w^2 ).
inline ValueWithError specific_heat_mc(const ThermoParams& tp, int workers = 0) {
    auto s = detail::thermo_pass(tp, workers);
    const double b2 = tp.beta() * tp.beta();
    return jackknife(s.per_block, [b2](const std::vector<double>& t) {
        double u = t[2] / t[0];
        return b2 * (t[3] / t[0] - u * u);
    });
}

/// rho = Z^2 with first-order error propagation.
inline ValueWithError density_mc(const ThermoParams& tp, int workers = 0) {
    ValueWithError z = partition_function_mc(tp, workers);
    return {z.value * z.value, 2.0 * z.value * z.stderr_};
}

struct ThermoQuantity {
    std::string name;
    double mc_value = 0.0;
    double mc_stderr = 0.0;
    std::optional<double> cameron_martin;
    std::optional<double> spectral;
    std::optional<double> gaussian_moment;
};

struct ThermoReport {
    double temperature = 0.0;
    double beta = 0.0;
    int n_oscillators = 1;
    std::vector<ThermoQuantity> quantities; // Z, rho, U, F, C
    RunDiagnostics diagnostics;

    const ThermoQuantity& operator[](const std::string& name) const {
        for (const auto& q : quantities)
            if (q.name == name) return q;
        throw Error(ErrorCode::InvalidParams, "unknown quantity " + name);
    }
};

/// All five quantities from one ensemble pass (so rho = Z^2 holds bitwise),
/// with Cameron-Martin, spectral, and Gaussian-moment oracle columns.
inline ThermoReport thermo_report(const ThermoParams& tp, int workers = 0,
                                  int spectral_levels = 200) {
    auto s = detail::thermo_pass(tp, workers);
    const double beta = tp.beta();
    const auto omegas = tp.omegas();

    auto z = jackknife(s.per_block, [](const std::vector<double>& t) { return t[0] / t[4]; });
    auto u = jackknife(s.per_block, [](const std::vector<double>& t) { return t[2] / t[0]; });
    const double b2 = beta * beta;
    auto c = jackknife(s.per_block, [b2](const std::vector<double>& t) {
        double uu = t[2] / t[0];
        return b2 * (t[3] / t[0] - uu * uu);
    });
    ValueWithError rho{z.value * z.value, 2.0 * z.value * z.stderr_};
    ValueWithError f = free_energy(z.value, z.stderr_, beta);

    double cm_z = 1.0, cm_u = 0.0, cm_c = 0.0, gm_c = 0.0;
    double sp_z = 1.0, sp_u = 0.0, sp_c = 0.0, sp_f = 0.0;
    for (double w : omegas) {
        CameronMartin cm = cameron_martin(beta, w);
        cm_z *= cm.z;
        cm_u += cm.u;
        cm_c += cm.c;
        gm_c += gaussian_moment_specific_heat(beta, w);
        SpectralValues sp = spectral_oracle(tp.temperature, spectral_levels, w);
        sp_z *= sp.z;
        sp_u += sp.u;
        sp_c += sp.c;
        sp_f += sp.f;
    }
    double cm_f = -std::log(cm_z) / beta;

    ThermoReport rep;
    rep.temperature = tp.temperature;
    rep.beta = beta;
    rep.n_oscillators = tp.n_oscillators;
    rep.diagnostics = s.diag;
    rep.quantities = {
        {"Z", z.value, z.stderr_, cm_z, sp_z, std::nullopt},
        {"rho", rho.value, rho.stderr_, cm_z * cm_z, sp_z * sp_z, std::nullopt},
        {"U", u.value, u.stderr_, cm_u, sp_u, std::nullopt},
        {"F", f.value, f.stderr_, cm_f, sp_f, std::nullopt},
        {"C", c.value, c.stderr_, cm_c, sp_c, gm_c},
    };
    return rep;
}

struct SweepRow {
    double temperature = 0.0;
    double beta = 0.0;
    double u_mc = 0.0;
    double u_stderr = 0.0;
    double oracle_value = 0.0;
    std::string oracle_name = "cameron_martin";
};

/// Runs internal_energy_mc at each temperature; per-temperature seeds are
/// decorrelated deterministically from the base seed.
inline std::vector<SweepRow> temperature_sweep(const std::vector<double>& temperatures,
                                               int n_oscillators, const PathParams& base,
                                               int workers = 0) {
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
        ThermoParams tp = make_thermo_params(temperatures[i], n_oscillators, base);
        tp.paths.seed = base.seed + 0x9E3779B97F4A7C15ull * (i + 1);
        ValueWithError u = internal_energy_mc(tp, workers);
        SweepRow row;
        row.temperature = temperatures[i];
        row.beta = tp.beta();
        row.u_mc = u.value;
        row.u_stderr = u.stderr_;
        double oracle = 0.0;
        for (double w : tp.omegas()) oracle += cameron_martin(row.beta, w).u;
        row.oracle_value = oracle;
        rows.push_back(row);
    }
    return rows;
}

} // namespace gfk
