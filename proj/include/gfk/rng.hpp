#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gfk {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
/// One block maps a 128-bit counter + 64-bit key to 128 random bits.
/// Pure function of (key, counter): streams are splittable by construction.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c,
                                              std::array<std::uint32_t, 2> k) {
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }
};

/// One independent random stream per path index. The 128-bit Philox counter
/// is split as (stream id, draw counter), so any stream is reproducible from
/// (seed, stream) alone, independent of scheduling or worker count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    /// Uniform in [0,1), 53-bit resolution.
    double uniform() {
        std::uint64_t bits = next_u64();
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; draws are cached in pairs.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform(); // (0,1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_u64() {
        if (word_pos_ == 4) refill();
        std::uint64_t lo = buffer_[word_pos_];
        std::uint64_t hi = buffer_[word_pos_ + 1];
        word_pos_ += 2;
        return lo | (hi << 32);
    }

private:
    void refill() {
        buffer_ = Philox4x32::block(
            {stream_lo_, stream_hi_, static_cast<std::uint32_t>(draw_),
             static_cast<std::uint32_t>(draw_ >> 32)},
            key_);
        ++draw_;
        word_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t draw_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int word_pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace gfk
