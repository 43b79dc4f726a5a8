#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Every random number is a pure function of (key, counter), so ensemble
// draws keyed by (seed, sample, i, j) do not depend on which worker produced
// them or in what order.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace credtopo {

struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }
};

inline constexpr Philox4x32::Key philox_key(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// 53-bit uniform in [0, 1).
inline constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

// Uniform draw addressed by (seed, stream, i, j).
inline double keyed_uniform(std::uint64_t seed, std::uint64_t stream, std::uint32_t i,
                            std::uint32_t j) noexcept {
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), i, j},
        philox_key(seed));
    return to_unit(out[0], out[1]);
}

// Sequential stream over the counter space of one (seed, stream) pair.
// Satisfies UniformRandomBitGenerator.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(philox_key(seed)), stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (used_ == 2) refill();
        return buffer_[used_++];
    }

    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1), safe for logs.
    double open_uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller; both variates of a pair are used.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = open_uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
    double lognormal(double mu, double sigma) noexcept { return std::exp(normal(mu, sigma)); }
    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t v;
        do v = (*this)();
        while (v >= limit);
        return v % n;
    }

private:
    void refill() noexcept {
        const auto out = Philox4x32::block(
            {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            key_);
        ++counter_;
        buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        used_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int used_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace credtopo
