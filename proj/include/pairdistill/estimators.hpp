#pragma once

// Correlation and heralding estimators for CW and pulsed acquisitions.
//
// Pulsed counting treats each detector as a click detector: per pulse, a
// channel contributes 1 if it fired at least once inside the gate, and a
// coincidence is a pulse where both fired. Uncertainties are first-order
// Poisson propagation of the underlying counts.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>

#include "json.hpp"

#include "pairdistill/histogram.hpp"
#include "pairdistill/tag_stream.hpp"

namespace pairdistill::estimate {

struct Measurement {
    double value = 0.0;
    double sigma = 0.0;
};

struct CwCountingSummary {
    double r1 = 0.0;  // singles rates, 1/s
    double r2 = 0.0;
    double rc = 0.0;  // coincidences within the window, 1/s
    double window_t = 0.0;  // s
    double duration = 0.0;  // s
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    std::int64_t nc = 0;
};

struct PulsedCountingSummary {
    double n1 = 0.0;  // mean clicks per pulse
    double n2 = 0.0;
    double nc = 0.0;  // mean coincidences per pulse
    std::int64_t pulses = 0;
    std::int64_t k1 = 0;  // pulses with a Det1 click
    std::int64_t k2 = 0;
    std::int64_t kc = 0;  // pulses with both
};

/// Singles per channel and multi-stop coincidences with |t2 - t1| inside
/// [-window/2, window/2). Duration is the configured CW duration when set,
/// otherwise the span of the record. Throws Error{EmptyStream}.
CwCountingSummary summarize_cw(const TagStream& stream, Picoseconds window_ps);

/// g2 = Rc / (R1 R2 T).
Measurement g2_cw(const CwCountingSummary& s);

/// eta_1 = (Rc - R1 R2 T) / R2, eta_2 = (Rc - R1 R2 T) / R1. Not clamped.
std::array<Measurement, 2> eta_cw(const CwCountingSummary& s);

/// Per-pulse click statistics after the optional gate (nullopt counts the
/// whole pulse period). Throws Error{NoTrigger}.
PulsedCountingSummary summarize_pulsed(const TagStream& stream, const std::optional<tags::GateWindow>& gate);

/// g2 = <Nc> / (<N1><N2>).
Measurement g2_pulsed(const PulsedCountingSummary& s);

/// eta_1 = (<Nc> - <N1><N2>) / <N2>, and symmetric. Not clamped.
std::array<Measurement, 2> eta_pulsed(const PulsedCountingSummary& s);

struct AlphaEstimate {
    double alpha = 0.0;
    double raw = 0.0;
    bool clipped = false;  // raw exceeded 1
};

/// alpha = eta / eta_det, clipped to 1 with a flag. Throws Error{Domain}
/// unless 0 < eta_det <= 1.
AlphaEstimate alpha_from_eta(double eta, double eta_det);

struct ReportOptions {
    bool use_gate = true;
    double threshold_fraction = 0.05;
    Picoseconds bin_width = 50;
    Picoseconds sync_range = 50'000;
    std::optional<tags::GateWindow> gate;  // skips gate finding when set
    std::optional<Picoseconds> cw_window;  // defaults to the configured window
    std::optional<double> n0_override;     // photons per mode set used for purity
};

struct AnalysisReport {
    Regime regime = Regime::Pulsed;
    Measurement g2;
    Measurement eta1;
    Measurement eta2;
    Measurement alpha;
    bool alpha_clipped = false;
    double eta_det = 0.0;
    std::int64_t modes = 1;
    double n_det = 0.0;  // detected photons per pulse (or per window, CW)
    double n0 = 0.0;
    Measurement purity_simple;
    Measurement purity_rigorous;
    std::optional<tags::GateWindow> gate;
    std::optional<PulsedCountingSummary> pulsed;
    std::optional<CwCountingSummary> cw;

    friend bool operator==(const AnalysisReport& a, const AnalysisReport& b);
};

/// Runs gating (pulsed) or windowing (CW), every estimator, recovers alpha
/// and N0 = N_det / eta_det, and evaluates both purity models at the
/// recovered point with alpha clamped into [0, 1].
AnalysisReport full_report(const TagStream& stream, double eta_det, std::int64_t modes,
                           const ReportOptions& options = {});

nlohmann::json to_json(const AnalysisReport& report);
void print_table(const AnalysisReport& report, std::ostream& out);

}  // namespace pairdistill::estimate
