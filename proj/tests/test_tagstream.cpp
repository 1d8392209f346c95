#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "pairdistill/error.hpp"
#include "pairdistill/histogram.hpp"
#include "pairdistill/random.hpp"
#include "pairdistill/simulator.hpp"

using namespace pairdistill;
using namespace pairdistill::tags;

namespace {

EmissionConfig pulsed(double alpha, double n0, std::int64_t d, std::int64_t pulses) {
    EmissionConfig c;
    c.population = stats::MixtureParams{alpha, n0, d}.to_population();
    c.pulse_count = pulses;
    return c;
}

ErrorCategory category_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.category();
    }
    FAIL("expected an error");
    return ErrorCategory::Io;
}

/// Two independent Poisson click trains over `span` ps.
TagStream poisson_pair(double rate1_per_ps, double rate2_per_ps, Picoseconds span, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<Tag> tags;
    for (int ch = 0; ch < 2; ++ch) {
        const double rate = ch == 0 ? rate1_per_ps : rate2_per_ps;
        for (double t = rng.exponential(1.0 / rate); t < static_cast<double>(span); t += rng.exponential(1.0 / rate)) {
            tags.push_back(Tag{static_cast<Picoseconds>(t), static_cast<Channel>(ch), Origin::Unknown});
        }
    }
    EmissionConfig meta;
    meta.regime = Regime::Cw;
    meta.duration_ps = span;
    return TagStream(std::move(tags), meta, false);
}

/// Histogram filled from an exact Gaussian profile.
Histogram1D gaussian_histogram(double center, double sigma, double amplitude, Picoseconds bin_width, Picoseconds range,
                               std::int64_t floor = 0) {
    Histogram1D h{bin_width, 0, std::vector<std::int64_t>(static_cast<std::size_t>(range / bin_width), 0),
                  AxisLabel::TriggerDelay};
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = h.bin_center(i) - center;
        h.counts[i] = floor + std::llround(amplitude * std::exp(-0.5 * x * x / (sigma * sigma)));
    }
    return h;
}

std::size_t detector_tags(const TagStream& s) { return s.count(Channel::Det1) + s.count(Channel::Det2); }

}  // namespace

TEST_CASE("coincidence histogram of independent streams is flat") {
    const TagStream s = poisson_pair(1.2e-7, 1.5e-7, 2'000'000'000'000, 3);  // 2 s
    const Histogram1D h = coincidence_histogram(s, 1000, 50000);
    const double mean = static_cast<double>(h.total()) / static_cast<double>(h.size());
    const double expected = 1.2e-7 * 1.5e-7 * 1000.0 * 2e12;  // R1 R2 T duration per bin
    CHECK(mean == doctest::Approx(expected).epsilon(0.05));
    for (auto c : h.counts) CHECK(std::abs(static_cast<double>(c) - mean) < 4.0 * std::sqrt(mean));
}

TEST_CASE("coincidence histogram conserves pair counts") {
    const TagStream s = poisson_pair(2e-6, 3e-6, 20'000'000, 5);
    const auto t1 = s.times(Channel::Det1), t2 = s.times(Channel::Det2);
    const Picoseconds range = 5000;
    std::int64_t brute = 0;
    std::map<Picoseconds, std::int64_t> brute_bins;
    for (auto a : t1)
        for (auto b : t2)
            if (b - a >= -range && b - a < range) {
                ++brute;
                ++brute_bins[(b - a + range) / 250];
            }
    const Histogram1D h = coincidence_histogram(s, 250, range);
    CHECK(h.total() == brute);
    for (const auto& [bin, n] : brute_bins) CHECK(h.counts[static_cast<std::size_t>(bin)] == n);
    CHECK(h.origin == -range);
}

TEST_CASE("start-stop pairing uses the first later stop") {
    const TagStream s = poisson_pair(2e-6, 3e-6, 20'000'000, 9);
    const auto t1 = s.times(Channel::Det1), t2 = s.times(Channel::Det2);
    const Picoseconds range = 2000;
    std::int64_t in_range = 0, beyond = 0;
    for (auto a : t1) {
        auto it = std::lower_bound(t2.begin(), t2.end(), a);
        if (it == t2.end()) continue;
        (*it - a < range ? in_range : beyond)++;
    }
    const Histogram1D h = coincidence_histogram(s, 100, range, PairingRule::StartStop);
    CHECK(h.total() == in_range);
    CHECK(h.out_of_range == beyond);
    // Stops never precede starts.
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h.bin_start(i) < 0) CHECK(h.counts[i] == 0);
}

TEST_CASE("coincidence histogram errors") {
    const TagStream only1({Tag{10, Channel::Det1}}, EmissionConfig{}, false);
    CHECK(category_of([&] { coincidence_histogram(only1, 50, 1000); }) == ErrorCategory::EmptyStream);
    CHECK(category_of([&] { coincidence_histogram(only1, 0, 1000); }) == ErrorCategory::Domain);
}

TEST_CASE("lossless jitter-free pairs fall in the zero-delay bin") {
    EmissionConfig c = pulsed(1.0, 0.3, 1, 5000);
    c.detector_efficiency = {1.0, 1.0};
    c.jitter_sigma_ps = 0.0;
    const Histogram1D h = coincidence_histogram(sim::simulate_pulsed(c), 50, 5000);
    const auto zero = *h.bin_of(0);
    CHECK(h.counts[zero] == h.total());
    CHECK(h.total() > 0);
}

TEST_CASE("CW coincidence peak width is the jitter convolution") {
    EmissionConfig c;
    c.regime = Regime::Cw;
    c.duration_ps = 100'000'000'000;  // 0.1 s
    c.population = {2e-6, 2e-6, 1};   // 2e6 pairs/s and PL per arm
    c.detector_efficiency = {0.5, 0.5};
    c.jitter_sigma_ps = 100.0;
    const Histogram1D h = coincidence_histogram(sim::simulate_cw(c), 10, 5000);
    // Floor from the outer bins, then moments of the floor-subtracted peak.
    double floor = 0.0;
    int nf = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (std::abs(h.bin_center(i)) > 2000.0) {
            floor += static_cast<double>(h.counts[i]);
            ++nf;
        }
    }
    floor /= nf;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = h.bin_center(i);
        if (std::abs(x) > 800.0) continue;
        const double y = static_cast<double>(h.counts[i]) - floor;
        s0 += y;
        s1 += y * x;
        s2 += y * x * x;
    }
    const double mean = s1 / s0;
    const double sigma = std::sqrt(s2 / s0 - mean * mean);
    CHECK(std::abs(mean) < 5.0);
    CHECK(sigma == doctest::Approx(100.0 * std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("coincidence binning is independent of the worker count") {
    EmissionConfig c;
    c.regime = Regime::Cw;
    c.duration_ps = 50'000'000'000;
    c.population = {1e-6, 3e-6, 1};
    const TagStream s = sim::simulate_cw(c);
    CHECK(coincidence_histogram(s, 50, 5000, PairingRule::MultiStop, 1) ==
          coincidence_histogram(s, 50, 5000, PairingRule::MultiStop, 4));
}

TEST_CASE("synchronous histogram accounting") {
    EmissionConfig c = pulsed(0.5, 1.0, 10, 20000);
    const TagStream sim_stream = sim::simulate_pulsed(c);
    const TagStream early({Tag{-700, Channel::Det1, Origin::Dark}, Tag{-20, Channel::Det1, Origin::Dark}}, c, true);
    const TagStream s = merge(sim_stream, early);
    const Histogram1D h = sync_histogram(s, Channel::Det1, 50, 20000);
    CHECK(h.unassigned == 2);
    CHECK(h.total() + h.out_of_range + h.unassigned == static_cast<std::int64_t>(s.count(Channel::Det1)));
    CHECK(h.axis == AxisLabel::TriggerDelay);
    const TagStream no_triggers({Tag{10, Channel::Det1}}, EmissionConfig{}, false);
    CHECK(category_of([&] { sync_histogram(no_triggers, Channel::Det1, 50, 1000); }) == ErrorCategory::NoTrigger);
    CHECK(category_of([&] { threefold_histogram(no_triggers, 50, 1000); }) == ErrorCategory::NoTrigger);
}

TEST_CASE("synchronous histogram of photoluminescence decays with the lifetime") {
    EmissionConfig c = pulsed(0.0, 1.0, 10, 60000);
    c.detector_efficiency = {1.0, 1.0};
    const TagStream s = sim::simulate_pulsed(c);
    const Histogram1D h = combined_sync_histogram(s, 50, 200000);
    REQUIRE(h.total() >= 100000);
    // Maximum-likelihood lifetime: mean delay past the emission time (jitter has zero mean).
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) sum += static_cast<double>(h.counts[i]) * h.bin_center(i);
    const double tau = sum / static_cast<double>(h.total()) - static_cast<double>(c.emission_delay_ps);
    CHECK(tau == doctest::Approx(5000.0).epsilon(0.05));
    // Shape: histogram follows the exponentially modified Gaussian law.
    const double n = static_cast<double>(h.total());
    for (Picoseconds t : {2000, 4000, 8000, 15000}) {
        double cum = 0.0;
        for (std::size_t i = 0; i < h.size() && h.bin_start(i) < t; ++i) cum += static_cast<double>(h.counts[i]);
        const double expected = oracle::exgauss_cdf(static_cast<double>(t - c.emission_delay_ps), 5000.0, 100.0);
        CHECK(std::abs(cum / n - expected) < 5.0 * std::sqrt(expected * (1 - expected) / n) + 1e-3);
    }
}

TEST_CASE("synchronous histogram of SPDC is a jitter-wide peak at the emission time") {
    EmissionConfig c = pulsed(1.0, 0.5, 10, 50000);
    c.detector_efficiency = {1.0, 1.0};
    const Histogram1D h = sync_histogram(sim::simulate_pulsed(c), Channel::Det1, 10, 5000);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double y = static_cast<double>(h.counts[i]), x = h.bin_center(i);
        s0 += y;
        s1 += y * x;
        s2 += y * x * x;
    }
    const double mean = s1 / s0;
    const double var = s2 / s0 - mean * mean - 10.0 * 10.0 / 12.0;  // Sheppard correction
    CHECK(std::abs(mean - 2000.0) < 3.0);
    CHECK(std::sqrt(var) == doctest::Approx(100.0).epsilon(0.03));
}

TEST_CASE("find_gate on a known Gaussian returns its FWHM") {
    const Histogram1D h = gaussian_histogram(2003.0, 100.0, 1e5, 10, 6000);
    const GateWindow g = find_gate(h, 0.5);
    const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * 100.0;
    CHECK(std::abs(static_cast<double>(g.width) - fwhm) <= 10.0);
    CHECK(std::abs(static_cast<double>(g.offset) + 0.5 * static_cast<double>(g.width) - 2003.0) <= 5.0);

    // A uniform floor underneath does not move the half-maximum window.
    const GateWindow g2 = find_gate(gaussian_histogram(2003.0, 100.0, 1e5, 10, 6000, 400), 0.5);
    CHECK(std::abs(static_cast<double>(g2.width) - fwhm) <= 10.0);
}

TEST_CASE("find_gate on simulated SPDC recovers the jitter FWHM") {
    EmissionConfig c = pulsed(1.0, 0.5, 10, 100000);
    c.detector_efficiency = {1.0, 1.0};
    const Histogram1D h = combined_sync_histogram(sim::simulate_pulsed(c), 20, 8000);
    const GateWindow g = find_gate(h, 0.5);
    CHECK(static_cast<double>(g.width) == doctest::Approx(235.5).epsilon(0.08));
}

TEST_CASE("find_gate rejects flat or empty histograms") {
    SplitMix64 rng(4);
    Histogram1D flat{50, 0, std::vector<std::int64_t>(400, 0), AxisLabel::TriggerDelay};
    for (auto& v : flat.counts) v = sample_poisson(rng, 100.0);
    CHECK(category_of([&] { find_gate(flat, 0.5); }) == ErrorCategory::NoPeak);
    Histogram1D empty{50, 0, std::vector<std::int64_t>(10, 0), AxisLabel::TriggerDelay};
    CHECK(category_of([&] { find_gate(empty, 0.5); }) == ErrorCategory::NoPeak);
    CHECK(category_of([&] { find_gate(flat, 1.5); }) == ErrorCategory::Domain);
}

TEST_CASE("gating audit on a mixed stream") {
    EmissionConfig c = pulsed(0.5, 1.0, 100, 100000);
    c.detector_efficiency = {0.5, 0.5};
    const TagStream s = sim::simulate_pulsed(c);
    const GateWindow gate = find_gate(combined_sync_histogram(s, 50, 50000), 0.05);
    const TagStream gated = apply_gate(s, gate);

    const auto [spdc, pl] = split_truth(s);
    const auto [spdc_kept, pl_kept] = split_truth(gated);
    const double spdc_retention = double(detector_tags(spdc_kept)) / double(detector_tags(spdc));
    const double pl_retention = double(detector_tags(pl_kept)) / double(detector_tags(pl));
    INFO("gate [" << gate.offset << ", +" << gate.width << ") spdc " << spdc_retention << " pl " << pl_retention);
    CHECK(spdc_retention >= 0.95);
    CHECK(pl_retention <= 0.10);

    // Tail photons beyond three lifetimes are almost all rejected.
    const Picoseconds tail_start = c.emission_delay_ps + 3 * c.pl_lifetime_ps;
    const Histogram1D tail_all = combined_sync_histogram(pl, 50, 200000);
    const Histogram1D tail_kept = combined_sync_histogram(pl_kept, 50, 200000);
    std::int64_t all = 0, kept = 0;
    for (std::size_t i = 0; i < tail_all.size(); ++i) {
        if (tail_all.bin_start(i) < tail_start) continue;
        all += tail_all.counts[i];
        kept += tail_kept.counts[i];
    }
    REQUIRE(all > 0);
    CHECK(double(kept) <= 0.01 * double(all));
}

TEST_CASE("apply_gate properties") {
    EmissionConfig c = pulsed(0.5, 1.0, 50, 20000);
    const TagStream s = sim::simulate_pulsed(c);
    const GateWindow full{0, c.period_ps()};
    CHECK(apply_gate(s, full) == s);

    const GateWindow narrow{0, 1};
    const TagStream none = apply_gate(s, narrow);
    CHECK(detector_tags(none) == 0);
    CHECK(none.count(Channel::Trigger) == s.count(Channel::Trigger));

    const GateWindow g{1800, 400};
    const TagStream once = apply_gate(s, g);
    CHECK(apply_gate(once, g) == once);

    // Monotone: no pulse gains tags.
    const Picoseconds period = c.period_ps();
    std::vector<int> before(static_cast<std::size_t>(c.pulse_count)), after(before.size());
    for (const Tag& t : s.events()) if (t.channel != Channel::Trigger) ++before[static_cast<std::size_t>(t.time_ps / period)];
    for (const Tag& t : once.events()) if (t.channel != Channel::Trigger) ++after[static_cast<std::size_t>(t.time_ps / period)];
    for (std::size_t k = 0; k < before.size(); ++k) CHECK(after[k] <= before[k]);

    CHECK(category_of([&] { apply_gate(s, GateWindow{0, 0}); }) == ErrorCategory::Domain);
}

TEST_CASE("three-fold histogram") {
    SUBCASE("jitter-free SPDC occupies one bin") {
        EmissionConfig c = pulsed(1.0, 0.5, 5, 5000);
        c.detector_efficiency = {1.0, 1.0};
        c.jitter_sigma_ps = 0.0;
        const Histogram2D h = threefold_histogram(sim::simulate_pulsed(c), 50, 10000);
        const std::size_t b = static_cast<std::size_t>(c.emission_delay_ps / 50);
        CHECK(h.at(b, b) == h.total());
        CHECK(h.total() > 0);
    }
    SUBCASE("marginals and gated region identities") {
        EmissionConfig c = pulsed(0.5, 1.0, 100, 40000);
        c.detector_efficiency = {0.4, 0.4};
        const TagStream s = sim::simulate_pulsed(c);
        const Picoseconds bw = 50, range = 40000;
        const Histogram2D h = threefold_histogram(s, bw, range);

        // Oracle: every Det1 delay weighted by the in-range Det2 tags of its pulse.
        const Picoseconds period = c.period_ps();
        std::map<std::int64_t, std::pair<std::vector<Picoseconds>, std::vector<Picoseconds>>> pulses;
        for (const Tag& t : s.events()) {
            if (t.channel == Channel::Trigger) continue;
            const Picoseconds delay = t.time_ps % period;
            if (delay >= range) continue;
            auto& slot = pulses[t.time_ps / period];
            (t.channel == Channel::Det1 ? slot.first : slot.second).push_back(delay);
        }
        std::vector<std::int64_t> mx(h.nx, 0), my(h.ny, 0);
        for (const auto& [k, d] : pulses) {
            for (auto t1 : d.first) mx[static_cast<std::size_t>(t1 / bw)] += static_cast<std::int64_t>(d.second.size());
            for (auto t2 : d.second) my[static_cast<std::size_t>(t2 / bw)] += static_cast<std::int64_t>(d.first.size());
        }
        CHECK(h.marginal_x().counts == mx);
        CHECK(h.marginal_y().counts == my);

        // Region [gate x gate] equals the pair count after gating the stream.
        const GateWindow gate{1800, 400};
        const TagStream gated = apply_gate(s, gate);
        std::map<std::int64_t, std::pair<int, int>> per_pulse;
        for (const Tag& t : gated.events()) {
            if (t.channel == Channel::Det1) ++per_pulse[t.time_ps / period].first;
            if (t.channel == Channel::Det2) ++per_pulse[t.time_ps / period].second;
        }
        std::int64_t pairs = 0;
        for (const auto& [k, n] : per_pulse) pairs += static_cast<std::int64_t>(n.first) * n.second;
        CHECK(h.sum_region(gate.offset, gate.offset + gate.width, gate.offset, gate.offset + gate.width) == pairs);
        CHECK(pairs > 0);
    }
}

TEST_CASE("histogram export round trips") {
    const Histogram1D h = gaussian_histogram(500.0, 80.0, 1000.0, 25, 2000, 3);
    std::stringstream csv;
    write_csv(h, csv);
    const Histogram1D back = read_histogram_csv(csv, AxisLabel::TriggerDelay);
    CHECK(back.counts == h.counts);
    CHECK(back.bin_width == h.bin_width);
    CHECK(back.origin == h.origin);
    CHECK(histogram_from_json(to_json(h)) == h);

    std::stringstream bad("bin_start_ps,count\n0,1\nfoo,2\n");
    CHECK(category_of([&] { read_histogram_csv(bad); }) == ErrorCategory::FileFormat);
}
