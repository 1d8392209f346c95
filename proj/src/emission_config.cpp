#include "pairdistill/emission_config.hpp"

#include <cmath>
#include <string>

#include "pairdistill/error.hpp"

namespace pairdistill {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCategory::Configuration, what); }

}  // namespace

std::string_view regime_name(Regime regime) noexcept { return regime == Regime::Cw ? "cw" : "pulsed"; }

std::string_view routing_name(Routing routing) noexcept {
    return routing == Routing::Conjugate ? "conjugate" : "beamsplitter";
}

Regime parse_regime(std::string_view text) {
    if (text == "cw" || text == "CW") return Regime::Cw;
    if (text == "pulsed" || text == "Pulsed") return Regime::Pulsed;
    config_error("unknown regime '" + std::string(text) + "' (expected cw | pulsed)");
}

Routing parse_routing(std::string_view text) {
    if (text == "conjugate") return Routing::Conjugate;
    if (text == "beamsplitter" || text == "beam_splitter") return Routing::BeamSplitter;
    config_error("unknown routing '" + std::string(text) + "' (expected conjugate | beamsplitter)");
}

Picoseconds EmissionConfig::period_ps() const {
    if (!(rep_rate_hz > 0.0) || !std::isfinite(rep_rate_hz)) config_error("rep_rate_hz must be > 0");
    return static_cast<Picoseconds>(std::llround(1e12 / rep_rate_hz));
}

void EmissionConfig::validate() const {
    try {
        population.validate();
    } catch (const Error& e) {
        config_error(std::string("population: ") + e.what());
    }
    if (regime == Regime::Pulsed) {
        if (period_ps() < 1) config_error("rep_rate_hz gives a period below 1 ps");
        if (pulse_count < 0) config_error("pulse_count must be >= 0");
    } else {
        if (duration_ps < 0) config_error("duration_ps must be >= 0");
        if (coherence_time_ps < 1) config_error("coherence_time_ps must be >= 1");
    }
    if (pl_lifetime_ps <= 0) config_error("pl_lifetime_ps must be > 0");
    for (double eta : detector_efficiency) {
        if (!(eta >= 0.0 && eta <= 1.0)) config_error("detector_efficiency entries must lie in [0, 1]");
    }
    if (!(jitter_sigma_ps >= 0.0) || !std::isfinite(jitter_sigma_ps)) config_error("jitter_sigma_ps must be >= 0");
    if (coincidence_window_ps <= 0) config_error("coincidence_window_ps must be > 0");
    if (emission_delay_ps < 0) config_error("emission_delay_ps must be >= 0");
    if (!(dark_count_rate_hz >= 0.0) || !std::isfinite(dark_count_rate_hz)) {
        config_error("dark_count_rate_hz must be >= 0");
    }
}

}  // namespace pairdistill
