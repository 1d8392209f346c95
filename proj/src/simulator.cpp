#include "pairdistill/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pairdistill/error.hpp"
#include "pairdistill/parallel.hpp"
#include "pairdistill/random.hpp"

namespace pairdistill::sim {

namespace {

constexpr std::uint64_t kCwStreamSalt = 0xC3A5C85C97CB3127ULL;

struct BlockOutput {
    std::vector<Tag> tags;
    EmissionTally tally;
};

/// Routing, loss and jitter shared by both regimes.
class DetectionChain {
public:
    explicit DetectionChain(const EmissionConfig& config) : config_(config) {}

    /// `arm` is the conjugate mode set (0 or 1) the photon was emitted into.
    void detect(SplitMix64& rng, int arm, double emission_ps, Origin origin, std::vector<Tag>& out) const {
        int channel = arm;
        if (config_.routing == Routing::BeamSplitter) channel = rng.bernoulli(0.5) ? 1 : 0;
        if (!rng.bernoulli(config_.detector_efficiency[static_cast<std::size_t>(channel)])) return;
        double t = emission_ps;
        if (config_.jitter_sigma_ps > 0.0) t += config_.jitter_sigma_ps * rng.normal();
        out.push_back(Tag{static_cast<Picoseconds>(std::llround(t)), static_cast<Channel>(channel), origin});
    }

    void dark_counts(SplitMix64& rng, Picoseconds start, Picoseconds length, BlockOutput& out) const {
        if (config_.dark_count_rate_hz <= 0.0 || length <= 0) return;
        const double mean = config_.dark_count_rate_hz * static_cast<double>(length) * 1e-12;
        for (int channel = 0; channel < 2; ++channel) {
            const std::int64_t n = sample_poisson(rng, mean);
            out.tally.dark_counts += n;
            for (std::int64_t k = 0; k < n; ++k) {
                const auto t = start + static_cast<Picoseconds>(rng.uniform() * static_cast<double>(length));
                out.tags.push_back(Tag{t, static_cast<Channel>(channel), Origin::Dark});
            }
        }
    }

private:
    const EmissionConfig& config_;
};

TagStream assemble(std::vector<BlockOutput>& blocks, const EmissionConfig& config) {
    std::size_t total = 0;
    EmissionTally tally;
    for (const auto& b : blocks) {
        total += b.tags.size();
        tally.spdc_pairs += b.tally.spdc_pairs;
        tally.pl_photons += b.tally.pl_photons;
        tally.dark_counts += b.tally.dark_counts;
    }
    std::vector<Tag> events;
    events.reserve(total);
    for (auto& b : blocks) {
        events.insert(events.end(), b.tags.begin(), b.tags.end());
        std::vector<Tag>().swap(b.tags);
    }
    // PL tails and jitter can cross block boundaries; a full sort on the
    // total tag order makes the result independent of the block layout.
    std::sort(events.begin(), events.end(), tag_less);
    return TagStream(std::move(events), config, true, tally);
}

}  // namespace

TagStream simulate_pulsed(const EmissionConfig& config, unsigned threads) {
    if (config.regime != Regime::Pulsed) throw Error(ErrorCategory::Configuration, "simulate_pulsed needs regime pulsed");
    config.validate();
    const Picoseconds period = config.period_ps();
    const auto& pop = config.population;
    const DetectionChain chain(config);
    const double lifetime = static_cast<double>(config.pl_lifetime_ps);

    const std::int64_t n_blocks = (config.pulse_count + kPulsesPerBlock - 1) / kPulsesPerBlock;
    std::vector<BlockOutput> blocks(static_cast<std::size_t>(n_blocks));

    parallel_blocks(n_blocks, threads, [&](std::int64_t b) {
        BlockOutput& out = blocks[static_cast<std::size_t>(b)];
        const std::int64_t first = b * kPulsesPerBlock;
        const std::int64_t last = std::min(config.pulse_count, first + kPulsesPerBlock);
        for (std::int64_t pulse = first; pulse < last; ++pulse) {
            SplitMix64 rng = SplitMix64::substream(config.rng_seed, static_cast<std::uint64_t>(pulse));
            const Picoseconds trigger = pulse * period;
            out.tags.push_back(Tag{trigger, Channel::Trigger, Origin::Unknown});
            const double emission = static_cast<double>(trigger + config.emission_delay_ps);

            const std::int64_t pairs = sample_thermal_sum(rng, pop.mu_spdc, pop.modes);
            out.tally.spdc_pairs += pairs;
            for (std::int64_t k = 0; k < pairs; ++k) {
                chain.detect(rng, 0, emission, Origin::Spdc, out.tags);
                chain.detect(rng, 1, emission, Origin::Spdc, out.tags);
            }
            for (int arm = 0; arm < 2; ++arm) {
                const std::int64_t photons = sample_thermal_sum(rng, pop.mu_pl, pop.modes);
                out.tally.pl_photons += photons;
                for (std::int64_t k = 0; k < photons; ++k) {
                    chain.detect(rng, arm, emission + rng.exponential(lifetime), Origin::Pl, out.tags);
                }
            }
            chain.dark_counts(rng, trigger, period, out);
        }
    });
    return assemble(blocks, config);
}

TagStream simulate_cw(const EmissionConfig& config, unsigned threads) {
    if (config.regime != Regime::Cw) throw Error(ErrorCategory::Configuration, "simulate_cw needs regime cw");
    config.validate();
    const auto& pop = config.population;
    const DetectionChain chain(config);
    const double tau = static_cast<double>(config.coherence_time_ps);
    const double d = static_cast<double>(pop.modes);
    const double pair_rate = d * pop.mu_spdc / tau;  // per ps
    const double pl_rate_per_arm = d * pop.mu_pl / tau;

    const std::int64_t n_blocks = (config.duration_ps + kCwBlockPs - 1) / kCwBlockPs;
    std::vector<BlockOutput> blocks(static_cast<std::size_t>(n_blocks));

    parallel_blocks(n_blocks, threads, [&](std::int64_t b) {
        BlockOutput& out = blocks[static_cast<std::size_t>(b)];
        SplitMix64 rng = SplitMix64::substream(config.rng_seed ^ kCwStreamSalt, static_cast<std::uint64_t>(b));
        const Picoseconds start = b * kCwBlockPs;
        const Picoseconds length = std::min(config.duration_ps, start + kCwBlockPs) - start;
        const double span = static_cast<double>(length);

        if (pair_rate > 0.0) {
            for (double t = rng.exponential(1.0 / pair_rate); t < span; t += rng.exponential(1.0 / pair_rate)) {
                ++out.tally.spdc_pairs;
                const double emission = static_cast<double>(start) + t;
                chain.detect(rng, 0, emission, Origin::Spdc, out.tags);
                chain.detect(rng, 1, emission, Origin::Spdc, out.tags);
            }
        }
        if (pl_rate_per_arm > 0.0) {
            for (int arm = 0; arm < 2; ++arm) {
                for (double t = rng.exponential(1.0 / pl_rate_per_arm); t < span;
                     t += rng.exponential(1.0 / pl_rate_per_arm)) {
                    ++out.tally.pl_photons;
                    chain.detect(rng, arm, static_cast<double>(start) + t, Origin::Pl, out.tags);
                }
            }
        }
        chain.dark_counts(rng, start, length, out);
    });
    return assemble(blocks, config);
}

TagStream simulate(const EmissionConfig& config, unsigned threads) {
    return config.regime == Regime::Pulsed ? simulate_pulsed(config, threads) : simulate_cw(config, threads);
}

}  // namespace pairdistill::sim
