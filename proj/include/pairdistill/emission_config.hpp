#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "pairdistill/core_stats.hpp"

namespace pairdistill {

/// Integer picoseconds; the only time unit on the tag axis.
using Picoseconds = std::int64_t;

enum class Regime : std::uint8_t { Cw, Pulsed };

/// How emitted photons reach the two detectors.
///  - Conjugate: arm-1 modes go to Det1, arm-2 modes to Det2, so every
///    emitted pair is split across the detectors.
///  - BeamSplitter: every photon picks a detector with probability 1/2.
enum class Routing : std::uint8_t { Conjugate, BeamSplitter };

std::string_view regime_name(Regime regime) noexcept;
std::string_view routing_name(Routing routing) noexcept;
Regime parse_regime(std::string_view text);
Routing parse_routing(std::string_view text);

/// Physical parameterization of one simulated acquisition.
///
/// `population` is per pump pulse in the pulsed regime. In the CW regime it is
/// per coherence cell of duration `coherence_time_ps`: pairs arrive as a Poisson
/// process at d mu_spdc / tau_coh and photoluminescence at 2 d mu_pl / tau_coh.
///
/// pl_lifetime_ps and jitter_sigma_ps are not reported by any measurement this
/// model reproduces; the defaults are engineering choices.
struct EmissionConfig {
    Regime regime = Regime::Pulsed;
    double rep_rate_hz = 1000.0;
    std::int64_t pulse_count = 1000;
    Picoseconds duration_ps = 1'000'000'000'000;  // CW only (1 s)
    // alpha = 0.9, N0 = 0.2 photons per arm, d = 1130
    stats::ModePopulation population{0.9 * 0.2 / 1130.0, 0.1 * 0.2 / 1130.0, 1130};
    Picoseconds pl_lifetime_ps = 5000;
    std::array<double, 2> detector_efficiency{0.1, 0.1};
    double jitter_sigma_ps = 100.0;
    Picoseconds coincidence_window_ps = 2000;
    Picoseconds coherence_time_ps = 1;
    Picoseconds emission_delay_ps = 2000;  // trigger to emission
    double dark_count_rate_hz = 0.0;
    Routing routing = Routing::Conjugate;
    std::uint64_t rng_seed = 1;

    /// Pulse period rounded to whole picoseconds.
    Picoseconds period_ps() const;

    /// Throws Error{Configuration} on any out-of-range field.
    void validate() const;
};

}  // namespace pairdistill
