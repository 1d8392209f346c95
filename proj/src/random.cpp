#include "pairdistill/random.hpp"

namespace pairdistill {

std::int64_t sample_thermal(SplitMix64& rng, double mu) {
    if (mu <= 0.0) return 0;
    // P(M >= m) = q^m with q = mu / (1 + mu).
    const double log_q = std::log(mu) - std::log1p(mu);
    return static_cast<std::int64_t>(std::floor(std::log(rng.uniform_open0()) / log_q));
}

std::int64_t sample_thermal_sum(SplitMix64& rng, double mu, std::int64_t modes) {
    if (mu <= 0.0 || modes <= 0) return 0;
    const double q = mu / (1.0 + mu);
    const double d = static_cast<double>(modes);
    // P(0) = (1 - q)^d = (1 + mu)^-d, P(n + 1) / P(n) = q (n + d) / (n + 1).
    double pmf = std::exp(-d * std::log1p(mu));
    if (pmf < 1e-280) {
        std::int64_t total = 0;
        for (std::int64_t k = 0; k < modes; ++k) total += sample_thermal(rng, mu);
        return total;
    }
    const double u = rng.uniform();
    double cdf = pmf;
    std::int64_t n = 0;
    while (u >= cdf) {
        pmf *= q * (static_cast<double>(n) + d) / static_cast<double>(n + 1);
        ++n;
        const double next = cdf + pmf;
        if (next == cdf) break;  // tail exhausted in double precision
        cdf = next;
    }
    return n;
}

std::int64_t sample_poisson(SplitMix64& rng, double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        double pmf = std::exp(-mean);
        double cdf = pmf;
        const double u = rng.uniform();
        std::int64_t n = 0;
        while (u >= cdf) {
            ++n;
            pmf *= mean / static_cast<double>(n);
            const double next = cdf + pmf;
            if (next == cdf) break;
            cdf = next;
        }
        return n;
    }
    // Count unit-rate arrivals inside [0, mean).
    std::int64_t n = 0;
    double t = rng.exponential(1.0);
    while (t < mean) {
        ++n;
        t += rng.exponential(1.0);
    }
    return n;
}

}  // namespace pairdistill
