#include "pairdistill/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "pairdistill/core_stats.hpp"
#include "pairdistill/error.hpp"

namespace pairdistill::estimate {

namespace {

double as_double(std::int64_t v) { return static_cast<double>(v); }

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw Error(ErrorCategory::DegenerateInput, std::string(what) + " must be > 0");
}

bool same(const Measurement& a, const Measurement& b) { return a.value == b.value && a.sigma == b.sigma; }

struct Purities {
    Measurement simple;
    Measurement rigorous;
};

/// Both purity models at (alpha, N0) with first-order error propagation by
/// central differences.
Purities purities(double alpha, double alpha_sigma, double n0, double n0_sigma, std::int64_t modes) {
    auto eval = [modes](double a, double n) {
        a = std::clamp(a, 0.0, 1.0);
        n = std::max(n, 0.0);
        const stats::MixtureParams mix{a, n, modes};
        if (a == 0.0 && n == 0.0) return std::pair{0.0, 0.0};
        return std::pair{stats::purity_from_p(stats::p_simple(mix), modes),
                         stats::purity_from_p(stats::p_rigorous(mix), modes)};
    };
    const auto [ps, pr] = eval(alpha, n0);
    const double ha = 1e-6, hn = 1e-6 * std::max(1.0, n0);
    const auto [sa_hi, ra_hi] = eval(alpha + ha, n0);
    const auto [sa_lo, ra_lo] = eval(alpha - ha, n0);
    const auto [sn_hi, rn_hi] = eval(alpha, n0 + hn);
    const auto [sn_lo, rn_lo] = eval(alpha, n0 - hn);
    auto sigma = [&](double da, double dn) {
        return std::hypot(da / (2 * ha) * alpha_sigma, dn / (2 * hn) * n0_sigma);
    };
    return Purities{{ps, sigma(sa_hi - sa_lo, sn_hi - sn_lo)}, {pr, sigma(ra_hi - ra_lo, rn_hi - rn_lo)}};
}

}  // namespace

bool operator==(const AnalysisReport& a, const AnalysisReport& b) {
    return a.regime == b.regime && same(a.g2, b.g2) && same(a.eta1, b.eta1) && same(a.eta2, b.eta2) &&
           same(a.alpha, b.alpha) && a.alpha_clipped == b.alpha_clipped && a.n_det == b.n_det && a.n0 == b.n0 &&
           same(a.purity_simple, b.purity_simple) && same(a.purity_rigorous, b.purity_rigorous) && a.gate == b.gate;
}

CwCountingSummary summarize_cw(const TagStream& stream, Picoseconds window_ps) {
    if (window_ps <= 0) throw Error(ErrorCategory::Domain, "coincidence window must be > 0");
    const std::vector<Picoseconds> t1 = stream.times(Channel::Det1);
    const std::vector<Picoseconds> t2 = stream.times(Channel::Det2);
    if (t1.empty() && t2.empty()) throw Error(ErrorCategory::EmptyStream, "no detector tags");

    Picoseconds duration_ps = 0;
    if (stream.meta().regime == Regime::Cw && stream.meta().duration_ps > 0) {
        duration_ps = stream.meta().duration_ps;
    } else {
        duration_ps = stream.events().back().time_ps - stream.events().front().time_ps;
    }
    if (duration_ps <= 0) throw Error(ErrorCategory::EmptyStream, "record spans zero time");

    // Multi-stop: every Det2 tag with t2 - t1 in [-w/2, w/2).
    const Picoseconds lower = window_ps / 2;
    const Picoseconds upper = window_ps - lower;
    std::int64_t nc = 0;
    std::size_t lo = 0, hi = 0;
    for (const Picoseconds t : t1) {
        while (lo < t2.size() && t2[lo] < t - lower) ++lo;
        if (hi < lo) hi = lo;
        while (hi < t2.size() && t2[hi] < t + upper) ++hi;
        nc += static_cast<std::int64_t>(hi - lo);
    }

    CwCountingSummary s;
    s.duration = as_double(duration_ps) * 1e-12;
    s.window_t = as_double(window_ps) * 1e-12;
    s.n1 = static_cast<std::int64_t>(t1.size());
    s.n2 = static_cast<std::int64_t>(t2.size());
    s.nc = nc;
    s.r1 = as_double(s.n1) / s.duration;
    s.r2 = as_double(s.n2) / s.duration;
    s.rc = as_double(s.nc) / s.duration;
    return s;
}

Measurement g2_cw(const CwCountingSummary& s) {
    require_positive(s.r1, "R1");
    require_positive(s.r2, "R2");
    require_positive(s.window_t, "T");
    const double g2 = s.rc / (s.r1 * s.r2 * s.window_t);
    const double rel = std::sqrt((s.nc > 0 ? 1.0 / as_double(s.nc) : 0.0) + 1.0 / as_double(s.n1) + 1.0 / as_double(s.n2));
    return {g2, s.nc > 0 ? g2 * rel : 1.0 / (s.r1 * s.r2 * s.window_t * s.duration)};
}

std::array<Measurement, 2> eta_cw(const CwCountingSummary& s) {
    require_positive(s.r1, "R1");
    require_positive(s.r2, "R2");
    const double accidental = s.r1 * s.r2 * s.window_t;
    // In counts: eta_1 = nc / n2 - n1 T / D; d/dnc = 1/n2, d/dn1 = -T/D, d/dn2 = -nc/n2^2.
    auto one = [&](std::int64_t herald_n, double herald_r, std::int64_t other_n) {
        const double value = (s.rc - accidental) / herald_r;
        const double nh = as_double(herald_n), nc = as_double(s.nc), no = as_double(other_n);
        const double t_over_d = s.window_t / s.duration;
        const double var = nc / (nh * nh) + no * t_over_d * t_over_d + nc * nc / (nh * nh * nh);
        return Measurement{value, std::sqrt(var)};
    };
    return {one(s.n2, s.r2, s.n1), one(s.n1, s.r1, s.n2)};
}

PulsedCountingSummary summarize_pulsed(const TagStream& stream, const std::optional<tags::GateWindow>& gate) {
    if (gate) gate->validate();
    const std::vector<Picoseconds> triggers = stream.times(Channel::Trigger);
    if (triggers.empty()) throw Error(ErrorCategory::NoTrigger, "pulsed summary needs trigger events");

    std::vector<std::uint8_t> fired(triggers.size(), 0);  // bit 0: Det1, bit 1: Det2
    std::size_t next = 0;
    for (const Tag& tag : stream.events()) {
        if (tag.channel == Channel::Trigger) continue;
        while (next < triggers.size() && triggers[next] <= tag.time_ps) ++next;
        if (next == 0) continue;
        if (gate && !gate->contains(tag.time_ps - triggers[next - 1])) continue;
        fired[next - 1] |= tag.channel == Channel::Det1 ? 1u : 2u;
    }

    PulsedCountingSummary s;
    s.pulses = static_cast<std::int64_t>(triggers.size());
    for (const std::uint8_t f : fired) {
        s.k1 += f & 1u;
        s.k2 += (f >> 1) & 1u;
        s.kc += f == 3u;
    }
    const double p = as_double(s.pulses);
    s.n1 = as_double(s.k1) / p;
    s.n2 = as_double(s.k2) / p;
    s.nc = as_double(s.kc) / p;
    return s;
}

Measurement g2_pulsed(const PulsedCountingSummary& s) {
    require_positive(s.n1, "<N1>");
    require_positive(s.n2, "<N2>");
    const double g2 = s.nc / (s.n1 * s.n2);
    const double kc = std::max<double>(as_double(s.kc), 1.0);
    return {g2, g2 * std::sqrt(1.0 / kc + 1.0 / as_double(s.k1) + 1.0 / as_double(s.k2))};
}

std::array<Measurement, 2> eta_pulsed(const PulsedCountingSummary& s) {
    require_positive(s.n1, "<N1>");
    require_positive(s.n2, "<N2>");
    const double p = as_double(s.pulses);
    auto one = [&](std::int64_t k_herald, std::int64_t k_other) {
        const double kh = as_double(k_herald), kc = as_double(s.kc), ko = as_double(k_other);
        const double value = (s.nc - s.n1 * s.n2) / (kh / p);
        // value = kc / kh - ko / P
        const double var = kc / (kh * kh) + kc * kc / (kh * kh * kh) + ko / (p * p);
        return Measurement{value, std::sqrt(var)};
    };
    return {one(s.k2, s.k1), one(s.k1, s.k2)};
}

AlphaEstimate alpha_from_eta(double eta, double eta_det) {
    if (!(eta_det > 0.0 && eta_det <= 1.0)) throw Error(ErrorCategory::Domain, "eta_det must lie in (0, 1]");
    AlphaEstimate out;
    out.raw = eta / eta_det;
    out.clipped = out.raw > 1.0;
    out.alpha = out.clipped ? 1.0 : out.raw;
    return out;
}

AnalysisReport full_report(const TagStream& stream, double eta_det, std::int64_t modes, const ReportOptions& options) {
    if (modes < 1) throw Error(ErrorCategory::Domain, "mode count must be >= 1");
    AnalysisReport r;
    r.regime = stream.meta().regime;
    r.eta_det = eta_det;
    r.modes = modes;

    std::array<Measurement, 2> eta{};
    double n_det_sigma = 0.0;
    if (r.regime == Regime::Pulsed) {
        if (options.use_gate) {
            r.gate = options.gate ? *options.gate
                                  : tags::find_gate(tags::combined_sync_histogram(stream, options.bin_width,
                                                                                  options.sync_range),
                                                    options.threshold_fraction);
        }
        const PulsedCountingSummary s = summarize_pulsed(stream, r.gate);
        r.pulsed = s;
        r.g2 = g2_pulsed(s);
        eta = eta_pulsed(s);
        r.n_det = 0.5 * (s.n1 + s.n2);
        n_det_sigma = 0.5 * std::sqrt(as_double(s.k1 + s.k2)) / as_double(s.pulses);
    } else {
        const Picoseconds window = options.cw_window.value_or(stream.meta().coincidence_window_ps);
        const CwCountingSummary s = summarize_cw(stream, window);
        r.cw = s;
        r.g2 = g2_cw(s);
        eta = eta_cw(s);
        r.n_det = 0.5 * (s.r1 + s.r2) * s.window_t;
        n_det_sigma = 0.5 * std::sqrt(as_double(s.n1 + s.n2)) / s.duration * s.window_t;
    }
    r.eta1 = eta[0];
    r.eta2 = eta[1];

    const double eta_mean = 0.5 * (eta[0].value + eta[1].value);
    const AlphaEstimate a = alpha_from_eta(eta_mean, eta_det);
    r.alpha = {a.alpha, 0.5 * std::hypot(eta[0].sigma, eta[1].sigma) / eta_det};
    r.alpha_clipped = a.clipped;

    r.n0 = options.n0_override.value_or(r.n_det / eta_det);
    const double n0_sigma = options.n0_override ? 0.0 : n_det_sigma / eta_det;
    const Purities p = purities(a.alpha, r.alpha.sigma, r.n0, n0_sigma, modes);
    r.purity_simple = p.simple;
    r.purity_rigorous = p.rigorous;
    return r;
}

nlohmann::json to_json(const AnalysisReport& r) {
    auto m = [](const Measurement& x) { return nlohmann::json{{"value", x.value}, {"sigma", x.sigma}}; };
    nlohmann::json doc{
        {"regime", regime_name(r.regime)},
        {"g2", m(r.g2)},
        {"eta1", m(r.eta1)},
        {"eta2", m(r.eta2)},
        {"alpha", m(r.alpha)},
        {"alpha_clipped", r.alpha_clipped},
        {"eta_det", r.eta_det},
        {"modes", r.modes},
        {"n_det", r.n_det},
        {"n0", r.n0},
        {"purity_simple", m(r.purity_simple)},
        {"purity_rigorous", m(r.purity_rigorous)},
    };
    doc["gate"] = r.gate ? tags::to_json(*r.gate) : nlohmann::json(nullptr);
    if (r.pulsed) {
        const auto& s = *r.pulsed;
        doc["pulsed_summary"] = {{"n1", s.n1}, {"n2", s.n2}, {"nc", s.nc}, {"pulses", s.pulses},
                                 {"k1", s.k1}, {"k2", s.k2}, {"kc", s.kc}};
    }
    if (r.cw) {
        const auto& s = *r.cw;
        doc["cw_summary"] = {{"r1", s.r1}, {"r2", s.r2},         {"rc", s.rc}, {"window_s", s.window_t},
                             {"duration_s", s.duration}, {"n1", s.n1}, {"n2", s.n2}, {"nc", s.nc}};
    }
    return doc;
}

void print_table(const AnalysisReport& r, std::ostream& out) {
    auto row = [&out](const char* name, const Measurement& m, const char* unit = "") {
        out << "  " << std::left << std::setw(18) << name << std::right << std::setw(14) << std::setprecision(6)
            << m.value << " +/- " << std::setw(11) << m.sigma << ' ' << unit << '\n';
    };
    out << "regime: " << regime_name(r.regime);
    if (r.gate) {
        out << "   gate: [" << r.gate->offset << ", " << r.gate->offset + r.gate->width << ") ps";
    } else if (r.regime == Regime::Pulsed) {
        out << "   gate: none";
    }
    out << '\n';
    row("g2", r.g2);
    row("eta1", r.eta1);
    row("eta2", r.eta2);
    row("alpha", r.alpha);
    out << "  " << std::left << std::setw(18) << "N_det" << std::right << std::setw(14) << r.n_det << '\n';
    out << "  " << std::left << std::setw(18) << "N0" << std::right << std::setw(14) << r.n0 << '\n';
    row("purity (simple)", r.purity_simple);
    row("purity (rigorous)", r.purity_rigorous);
    if (r.alpha_clipped) out << "  warning: eta / eta_det exceeded 1; alpha clipped\n";
}

}  // namespace pairdistill::estimate
