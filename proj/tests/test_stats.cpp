#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gfk/stats.hpp"

using namespace gfk;

TEST_CASE("accumulator matches two-pass reference", "[stats]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist(3.0, 2.0);
    std::vector<double> xs;
    Accumulator acc;
    for (int i = 0; i < 10000; ++i) {
        double x = dist(rng);
        xs.push_back(x);
        acc.add(x);
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);
    CHECK(acc.mean() == Catch::Approx(mean).epsilon(1e-12));
    CHECK(acc.variance() == Catch::Approx(var).epsilon(1e-12));
}

TEST_CASE("accumulator merge is order-deterministic", "[stats]") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<Accumulator> parts(8);
    Accumulator whole;
    for (int b = 0; b < 8; ++b)
        for (int i = 0; i < 1000; ++i) {
            double x = dist(rng);
            parts[b].add(x);
            whole.add(x);
        }
    Accumulator m1, m2;
    for (int b = 0; b < 8; ++b) m1.merge(parts[b]);
    for (int b = 0; b < 8; ++b) m2.merge(parts[b]);
    CHECK(m1.mean() == m2.mean()); // bitwise: same order
    CHECK(m1.variance() == m2.variance());
    CHECK(m1.mean() == Catch::Approx(whole.mean()).epsilon(1e-12));
    CHECK(m1.variance() == Catch::Approx(whole.variance()).epsilon(1e-12));
}

TEST_CASE("jackknife ratio hand-computed example", "[stats]") {
    // blocks num={2,4}, den={1,1}: delete-one estimates {4,2}, mean 3, stderr 1
    auto r = jackknife_ratio({2.0, 4.0}, {1.0, 1.0});
    CHECK(r.value == Catch::Approx(3.0));
    CHECK(r.stderr_ == Catch::Approx(1.0));
}

TEST_CASE("jackknife of identical blocks has zero error", "[stats]") {
    auto r = jackknife_ratio({3.0, 3.0, 3.0, 3.0}, {1.5, 1.5, 1.5, 1.5});
    CHECK(r.value == Catch::Approx(2.0));
    CHECK(r.stderr_ == 0.0);

    auto s = jackknife_ratio({2.0, 4.0, 6.0}, {1.0, 2.0, 3.0}); // constant ratio
    CHECK(s.value == Catch::Approx(2.0));
    CHECK(s.stderr_ == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("jackknife ratio rejects vanishing denominators", "[stats]") {
    CHECK_THROWS_AS(jackknife_ratio({1.0, 2.0}, {1.0, -1.0}), Error);
    try {
        jackknife_ratio({1.0, 2.0}, {2.0, -2.0});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDenominatorBlock);
    }
}

TEST_CASE("inverse-time fit recovers an exact model", "[stats]") {
    std::vector<FitPoint> pts;
    for (int t = 8; t <= 80; t += 8) pts.push_back({double(t), 1.0 + 2.0 / t, 0.01});
    FitResult r = extrapolate_inverse_time(pts);
    CHECK(r.e_infinity == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.a_coeff == Catch::Approx(2.0).margin(1e-11));
    CHECK(r.chi2 == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("fit shift invariance", "[stats]") {
    std::vector<FitPoint> pts, shifted;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 1e-4);
    for (int t = 8; t <= 80; t += 8) {
        double e = -7.478 - 0.007 / t + noise(rng);
        double s = 1e-4 * (1.0 + 0.1 * (80.0 / t));
        pts.push_back({double(t), e, s});
        shifted.push_back({double(t), e + 5.0, s});
    }
    FitResult a = extrapolate_inverse_time(pts);
    FitResult b = extrapolate_inverse_time(shifted);
    CHECK(b.e_infinity - a.e_infinity == Catch::Approx(5.0).margin(1e-12));
    CHECK(b.a_coeff == Catch::Approx(a.a_coeff).margin(1e-10));
}

TEST_CASE("fit on the published lithium energy column", "[stats]") {
    // frozen oracle: independent weighted least squares (normal equations)
    // on the printed 10-row (t, E, sigma) table gives
    //   E_inf = -7.4780686 +- 0.0000052, a = -0.007077
    const double energies[10] = {-7.478927, -7.478519, -7.478380, -7.478294, -7.478244,
                                 -7.478215, -7.478194, -7.478176, -7.478166, -7.478157};
    const double sigmas[10] = {28e-6, 18e-6, 14e-6, 12e-6, 10e-6, 9e-6, 9e-6, 8e-6, 7e-6, 7e-6};
    std::vector<FitPoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({8.0 * (i + 1), energies[i], sigmas[i]});
    FitResult r = extrapolate_inverse_time(pts);
    CHECK(std::abs(r.e_infinity - (-7.4780686)) < 5e-5);
    CHECK(std::abs(r.e_infinity - (-7.4780686)) < 1e-6); // same formula, tight agreement
    CHECK(std::sqrt(r.covariance[0][0]) == Catch::Approx(5.2e-6).epsilon(0.05));
    CHECK(r.a_coeff == Catch::Approx(-0.007077).margin(2e-6));
}

TEST_CASE("fit on the published beryllium energy column", "[stats]") {
    // frozen oracle value from the independent computation: -14.6669703
    const double energies[10] = {-14.66946, -14.66822, -14.66782, -14.66762, -14.66750,
                                 -14.66745, -14.66734, -14.66729, -14.66721, -14.66719};
    const double sigmas[10] = {14e-5, 11e-5, 10e-5, 9e-5, 8e-5, 7e-5, 7e-5, 6e-5, 6e-5, 6e-5};
    std::vector<FitPoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({8.0 * (i + 1), energies[i], sigmas[i]});
    FitResult r = extrapolate_inverse_time(pts);
    CHECK(std::abs(r.e_infinity - (-14.6669703)) < 1e-6);
}

TEST_CASE("degenerate design rejected", "[stats]") {
    std::vector<FitPoint> pts{{8, 1.0, 0.1}, {8, 1.1, 0.1}, {8, 0.9, 0.1}};
    CHECK_THROWS_AS(extrapolate_inverse_time(pts), Error);
}

TEST_CASE("parenthetical error formatting", "[stats]") {
    CHECK(format_parenthetical(-7.478069, 0.000006) == "-7.478069(6)");
    CHECK(format_parenthetical(4.982, 0.016) == "4.982(16)");
    CHECK(format_parenthetical(1.0, 0.0) == "1.0");
    CHECK(format_parenthetical(-7.478927, 0.000028) == "-7.478927(28)");
    CHECK(format_parenthetical(0.2424, 0.004) == "0.242(4)");
    CHECK(format_parenthetical(18.33, 0.17) == "18.33(17)");
    CHECK(format_parenthetical(27.1, 0.6) == "27.1(6)");
    CHECK(format_parenthetical(123.4, 12.0) == "123(12)");
    CHECK(format_parenthetical(0.5, 0.0) == "0.5");
}
