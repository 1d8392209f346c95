#pragma once

// Counter-based random substreams. Each (seed, stream index) pair maps to an
// independent SplitMix64 sequence, so work split across threads reproduces
// the same numbers as a serial run.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace pairdistill {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    /// Substream `index` of `seed`.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
        return SplitMix64(splitmix64_mix(seed ^ splitmix64_mix(index + 0x9E3779B97F4A7C15ULL)));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1], safe for log().
    double uniform_open0() noexcept { return 1.0 - uniform(); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    double exponential(double mean) noexcept { return -mean * std::log(uniform_open0()); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
        const double phi = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Geometric (Bose-Einstein) count: P(m) = mu^m / (1 + mu)^(m + 1), inverse CDF.
std::int64_t sample_thermal(SplitMix64& rng, double mu);

/// Total count of `modes` independent thermal modes with mean `mu` each,
/// i.e. the negative-binomial sum, drawn by inverse CDF. Falls back to
/// per-mode draws where the vacuum term underflows.
std::int64_t sample_thermal_sum(SplitMix64& rng, double mu, std::int64_t modes);

/// Poisson count by inverse CDF for small means, exponential gaps otherwise.
std::int64_t sample_poisson(SplitMix64& rng, double mean);

}  // namespace pairdistill
