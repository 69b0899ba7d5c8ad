#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include "gfk/error.hpp"

namespace gfk {

/// Streaming mean/variance (Welford). Merging follows Chan's parallel update;
/// merges must be applied in a fixed order to keep results bit-deterministic.
class Accumulator {
public:
    void add(double x) {
        ++count_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const Accumulator& other) {
        if (other.count_ == 0) return;
        if (count_ == 0) { *this = other; return; }
        double na = static_cast<double>(count_);
        double nb = static_cast<double>(other.count_);
        double delta = other.mean_ - mean_;
        double n = na + nb;
        mean_ += delta * nb / n;
        m2_ += other.m2_ + delta * delta * na * nb / n;
        count_ += other.count_;
    }

    std::int64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double stderr_of_mean() const {
        return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }

private:
    std::int64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct ValueWithError {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Delete-one jackknife of an arbitrary statistic. Each block carries a vector
/// of sufficient sums; `f` maps totals to the statistic. The point estimate is
/// f(grand totals), the error comes from the spread of the leave-one-out values.
template <class F>
ValueWithError jackknife(const std::vector<std::vector<double>>& block_sums, F&& f) {
    const std::size_t n = block_sums.size();
    if (n < 2) throw Error(ErrorCode::InvalidParams, "jackknife needs at least 2 blocks");
    const std::size_t k = block_sums.front().size();
    std::vector<double> totals(k, 0.0);
    for (const auto& b : block_sums) {
        if (b.size() != k) throw Error(ErrorCode::InvalidParams, "ragged block sums");
        for (std::size_t j = 0; j < k; ++j) totals[j] += b[j];
    }
    double value = f(totals);
    std::vector<double> loo(n);
    std::vector<double> reduced(k);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) reduced[j] = totals[j] - block_sums[i][j];
        loo[i] = f(reduced);
        mean += loo[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    double se = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
    return {value, se};
}

/// Jackknife estimate and error of (sum num)/(sum den) over matched blocks.
inline ValueWithError jackknife_ratio(const std::vector<double>& num_blocks,
                                      const std::vector<double>& den_blocks) {
    if (num_blocks.size() != den_blocks.size())
        throw Error(ErrorCode::InvalidParams, "numerator/denominator block counts differ");
    const std::size_t n = num_blocks.size();
    if (n < 2) throw Error(ErrorCode::InvalidParams, "jackknife_ratio needs at least 2 blocks");
    double dtot = 0.0;
    for (double d : den_blocks) dtot += d;
    for (std::size_t i = 0; i < n; ++i)
        if (dtot - den_blocks[i] == 0.0 || dtot == 0.0)
            throw Error(ErrorCode::ZeroDenominatorBlock, "delete-one denominator vanishes");
    std::vector<std::vector<double>> blocks(n);
    for (std::size_t i = 0; i < n; ++i) blocks[i] = {num_blocks[i], den_blocks[i]};
    return jackknife(blocks, [](const std::vector<double>& t) { return t[0] / t[1]; });
}

struct FitPoint {
    double t = 0.0;
    double value = 0.0;
    double sigma = 0.0;
};

struct FitResult {
    double e_infinity = 0.0;
    double a_coeff = 0.0;
    std::array<std::array<double, 2>, 2> covariance{};
    double chi2 = 0.0;
};

/// Weighted linear least squares of E against 1/t: E(t) = E(inf) + a/t.
/// Weights are 1/sigma^2; pass weighted=false for an ordinary fit.
inline FitResult extrapolate_inverse_time(const std::vector<FitPoint>& points,
                                          bool weighted = true) {
    if (points.size() < 3)
        throw Error(ErrorCode::InvalidParams, "need at least 3 points");
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        if (p.t <= 0.0) throw Error(ErrorCode::InvalidParams, "times must be positive");
        if (p.sigma <= 0.0) throw Error(ErrorCode::InvalidParams, "sigmas must be positive");
        double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
        double x = 1.0 / p.t;
        s += w;
        sx += w * x;
        sy += w * p.value;
        sxx += w * x * x;
        sxy += w * x * p.value;
    }
    double det = s * sxx - sx * sx;
    if (!(std::abs(det) > 1e-14 * s * sxx))
        throw Error(ErrorCode::DegenerateDesign, "all times equal; slope not identifiable");
    FitResult r;
    r.e_infinity = (sxx * sy - sx * sxy) / det;
    r.a_coeff = (s * sxy - sx * sy) / det;
    r.covariance[0][0] = sxx / det;
    r.covariance[0][1] = r.covariance[1][0] = -sx / det;
    r.covariance[1][1] = s / det;
    for (const auto& p : points) {
        double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
        double resid = p.value - (r.e_infinity + r.a_coeff / p.t);
        r.chi2 += w * resid * resid;
    }
    return r;
}

/// Shortest decimal string that round-trips the double; guarantees a '.' or
/// exponent so integral values print as "1.0" rather than "1".
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string out(buf, res.ptr);
    if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
        out.find("inf") == std::string::npos && out.find("nan") == std::string::npos)
        out += ".0";
    return out;
}

/// Table-style parenthetical error format: value rounded to the error's place,
/// error quoted with 1 significant digit (2 when it leads with 1 or 2), e.g.
/// (-7.478069, 6e-6) -> "-7.478069(6)", (4.982, 0.016) -> "4.982(16)".
inline std::string format_parenthetical(double value, double stderr_) {
    if (stderr_ < 0.0 || !std::isfinite(value) || !std::isfinite(stderr_))
        throw Error(ErrorCode::InvalidParams, "bad value/error for formatting");
    if (stderr_ == 0.0) return format_double(value);

    int e10 = static_cast<int>(std::floor(std::log10(stderr_)));
    auto leading_digit = [&](int exp10) {
        return static_cast<int>(stderr_ / std::pow(10.0, exp10));
    };
    int lead = leading_digit(e10);
    if (lead >= 10) { ++e10; lead = leading_digit(e10); } // log10 edges at powers of 10
    if (lead == 0) { --e10; lead = leading_digit(e10); }
    int n_digits = (lead <= 2) ? 2 : 1;
    int place = e10 - (n_digits - 1);
    long long err_int = std::llround(stderr_ / std::pow(10.0, place));
    // the 1-digit path may round up to exactly 10 (e.g. 0.0996); "10" is the
    // standard two-digit rendering at the same place, so keep it

    char buf[80];
    if (place <= 0) {
        std::snprintf(buf, sizeof(buf), "%.*f(%lld)", -place, value, err_int);
    } else {
        double scale = std::pow(10.0, place);
        double vr = std::round(value / scale) * scale;
        long long err_units = err_int;
        for (int i = 0; i < place; ++i) err_units *= 10;
        std::snprintf(buf, sizeof(buf), "%.0f(%lld)", vr, err_units);
    }
    return std::string(buf);
}

} // namespace gfk
