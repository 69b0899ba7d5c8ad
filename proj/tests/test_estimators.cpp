#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gfk/estimators.hpp"
#include "gfk/trial.hpp"
#include "support/oracles.hpp"

using namespace gfk;

namespace {

PathParams oscillator_params(double t, double h, std::int64_t n_paths, std::uint64_t seed,
                             int record_every) {
    PathParams p;
    p.stepsize = h;
    p.total_time = t;
    p.n_paths = n_paths;
    p.seed = seed;
    p.record_every = record_every;
    p.equilibration_steps = 300;
    return p;
}

} // namespace

TEST_CASE("unit observable returns exactly one with zero error", "[estimators]") {
    GaussianTrial t(1.2, 1); // detuned: weights genuinely fluctuate
    HarmonicPotential v(1);
    PathParams p = oscillator_params(4.0, 1.0 / 30.0, 2000, 11, 30);
    auto r = gfk_expectation(t, v, Observable::unity(), p, Configuration(1, 1));
    for (const auto& s : r.slices) {
        CHECK(s.value == 1.0);  // bitwise: numerator and denominator identical
        CHECK(s.stderr_ == 0.0);
    }
    CHECK(r.converged.value == 1.0);
}

TEST_CASE("exact trial samples the stationary density", "[estimators]") {
    GaussianTrial t(1.0, 1);
    HarmonicPotential v(1);
    PathParams p = oscillator_params(12.0, 1.0 / 120.0, 20000, 21, 120);
    auto r = gfk_expectation(t, v, Observable::power_of_ri(2), p, Configuration(1, 1));
    REQUIRE(r.slices.size() == 11); // interior slices 1..11
    // <x^2> = 1/2 under phi0^2 = exp(-x^2)
    CHECK(std::abs(r.converged.value - 0.5) < 3.0 * r.converged.stderr_ + 0.003);
    CHECK(r.converged.stderr_ > 0.0);

    // slice stability across interior times >= 2: jackknife each pairwise
    // difference directly so slice correlations enter the joint error
    std::vector<SliceSums> blocks;
    std::vector<Observable> obs{Observable::power_of_ri(2)};
    run_ensemble(Configuration(1, 1), t, v, p, obs, blocks);
    const std::size_t n_slices = slice_steps(p).size();
    std::vector<std::vector<double>> bs;
    for (const auto& b : blocks) {
        std::vector<double> flat(b.a_w);
        flat.push_back(b.w_full);
        bs.push_back(std::move(flat));
    }
    for (std::size_t i = 2; i + 2 < n_slices; ++i)
        for (std::size_t j = i + 1; j + 1 < n_slices; ++j) {
            auto est = jackknife(bs, [&](const std::vector<double>& tot) {
                return tot[i] / tot[n_slices] - tot[j] / tot[n_slices];
            });
            CHECK(std::abs(est.value) < 3.0 * est.stderr_ + 1e-12);
        }
}

TEST_CASE("detuned trial is corrected toward the true ground state", "[estimators]") {
    // phi0 = exp(-0.6 x^2) while the potential's ground state is exp(-x^2/2)
    GaussianTrial t(1.2, 1);
    HarmonicPotential v(1);

    auto grid = oracle::diagonalize_1d([](double x) { return 0.5 * x * x; });
    REQUIRE(std::abs(grid.ground_energy - 0.5) < 1e-4);
    double x2_exact = oracle::ground_state_moment(grid, [](double x) { return x * x; });
    REQUIRE(std::abs(x2_exact - 0.5) < 1e-4);

    PathParams p = oscillator_params(16.0, 1.0 / 240.0, 20000, 33, 240);
    auto r = gfk_expectation(t, v, Observable::power_of_ri(2), p, Configuration(1, 1));
    // middle slice: both projection times large
    const SlicePoint& mid = r.slices[7];
    CHECK(std::abs(mid.value - x2_exact) < 3.0 * mid.stderr_ + 0.003);

    // uncorrected stationary average would be 1/(4*0.6) = 0.4167, far away
    CHECK(std::abs(mid.value - 1.0 / 2.4) > 5.0 * mid.stderr_);
}

TEST_CASE("energy estimate is zero-variance for an exact trial", "[estimators]") {
    GaussianTrial t(1.0, 1);
    HarmonicPotential v(1);
    PathParams p = oscillator_params(8.0, 1.0 / 30.0, 1000, 5, 30);
    p.equilibration_steps = 100;
    auto r = energy_estimate(t, v, p, Configuration(1, 1));
    for (const auto& s : r.slices) {
        CHECK(std::abs(s.value - 0.5) < 1e-12);
        CHECK(s.stderr_ < 1e-12);
        CHECK(!s.degenerate);
    }
}

TEST_CASE("energy estimate converges for the detuned trial", "[estimators]") {
    GaussianTrial t(1.2, 1);
    HarmonicPotential v(1);
    auto grid = oracle::diagonalize_1d([](double x) { return 0.5 * x * x; });

    PathParams p = oscillator_params(16.0, 1.0 / 240.0, 20000, 55, 4 * 240);
    auto r = energy_estimate(t, v, p, Configuration(1, 1));
    REQUIRE(r.slices.size() == 4); // t = 4, 8, 12, 16
    const SlicePoint& last = r.slices.back();
    CHECK(std::abs(last.value - grid.ground_energy) < 3.0 * last.stderr_ + 5e-4);
    // rough monotone trend from above within noise
    CHECK(r.slices[0].value + 3.0 * (r.slices[0].stderr_ + last.stderr_) > last.value);
    CHECK(r.converged.time == Catch::Approx(16.0));
}

TEST_CASE("gfk with unit weights equals the variational average", "[estimators]") {
    // force V_p == 0 by using the potential the trial solves exactly
    GaussianTrial t(1.2, 1);
    auto v = exact_potential_for(t);
    PathParams p = oscillator_params(10.0, 1.0 / 60.0, 20000, 77, 60);
    auto r = gfk_expectation(t, v, Observable::power_of_ri(2), p, Configuration(1, 1));

    auto [vmc, vmc_se] = oracle::metropolis_x2_mean(
        [](double x) { return std::exp(-0.6 * x * x); }, 400000, 1234);
    double se = std::sqrt(r.converged.stderr_ * r.converged.stderr_ + vmc_se * vmc_se);
    CHECK(std::abs(r.converged.value - vmc) < 3.0 * se + 0.003);
    CHECK(std::abs(r.converged.value - 1.0 / 2.4) < 3.0 * r.converged.stderr_ + 0.003);
}

TEST_CASE("correlation function reproduces the OU autocovariance", "[estimators]") {
    // stationary drift -x process: Cov(x(t1) x(t2)) = (1/2) e^{-(t2-t1)}
    GaussianTrial t(1.0, 1);
    HarmonicPotential v(1);
    PathParams p = oscillator_params(8.0, 1.0 / 30.0, 50000, 63, 30);
    Observable x = Observable::custom("x", [](const Configuration& c) { return c.coords[0]; });
    auto r = correlation_function(t, v, {{4.0, x}, {5.0, x}}, p, Configuration(1, 1));
    double expect = 0.5 * std::exp(-1.0);
    CHECK(std::abs(r.value - expect) < 3.0 * r.stderr_ + 0.002);
}

TEST_CASE("single-entry correlation equals the expectation slice", "[estimators]") {
    GaussianTrial t(1.2, 1);
    HarmonicPotential v(1);
    PathParams p = oscillator_params(6.0, 1.0 / 30.0, 3000, 91, 30);
    Observable x2 = Observable::power_of_ri(2);
    auto corr = correlation_function(t, v, {{4.0, x2}}, p, Configuration(1, 1));
    auto exp_r = gfk_expectation(t, v, x2, p, Configuration(1, 1));
    const SlicePoint* at4 = nullptr;
    for (const auto& s : exp_r.slices)
        if (std::abs(s.time - 4.0) < 1e-9) at4 = &s;
    REQUIRE(at4 != nullptr);
    CHECK(corr.value == at4->value); // same paths, same sums
    CHECK(corr.stderr_ == at4->stderr_);
}

TEST_CASE("all-unit correlation product is exactly one", "[estimators]") {
    GaussianTrial t(1.2, 1);
    HarmonicPotential v(1);
    PathParams p = oscillator_params(6.0, 1.0 / 30.0, 2000, 93, 30);
    Observable one = Observable::unity();
    auto r = correlation_function(t, v, {{2.0, one}, {3.0, one}, {4.0, one}}, p,
                                  Configuration(1, 1));
    CHECK(r.value == 1.0);
    CHECK(r.stderr_ == 0.0);
}

TEST_CASE("correlation times are validated", "[estimators]") {
    GaussianTrial t(1.0, 1);
    HarmonicPotential v(1);
    PathParams p = oscillator_params(6.0, 1.0 / 30.0, 100, 1, 30);
    Observable x = Observable::custom("x", [](const Configuration& c) { return c.coords[0]; });
    CHECK_THROWS_AS(correlation_function(t, v, {{3.0, x}, {2.0, x}}, p, Configuration(1, 1)),
                    Error);
    CHECK_THROWS_AS(correlation_function(t, v, {{2.0, x}, {6.0, x}}, p, Configuration(1, 1)),
                    Error);
    CHECK_THROWS_AS(correlation_function(t, v, {{2.0005, x}}, p, Configuration(1, 1)), Error);
}

TEST_CASE("degenerate weights are refused", "[estimators]") {
    // wildly mismatched trial: weights collapse onto a handful of paths
    UnitTrial t;
    HarmonicPotential v(std::vector<double>{20.0});
    PathParams p;
    p.stepsize = 1.0 / 30.0;
    p.total_time = 2.0;
    p.n_paths = 200;
    p.seed = 17;
    p.record_every = 30;
    try {
        gfk_expectation(t, v, Observable::power_of_ri(2), p, Configuration(1, 1));
        FAIL("expected degeneracy");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllWeightsDegenerate);
    }
}
