#pragma once

#include "pairdistill/emission_config.hpp"
#include "pairdistill/tag_stream.hpp"

namespace pairdistill::sim {

/// Work units are fixed-size blocks of pulses (pulsed) or of time (CW), each
/// with its own random substream, so the output does not depend on `threads`.
inline constexpr std::int64_t kPulsesPerBlock = 4096;
inline constexpr Picoseconds kCwBlockPs = 1'000'000'000;  // 1 ms

/// Pulsed SPDC + photoluminescence. Trigger k sits at k * period; emission
/// happens emission_delay_ps later. Per pulse, pair and PL photon numbers
/// are drawn from the thermal (geometric) law of every mode; PL photons are
/// delayed by an exponential with mean pl_lifetime_ps. Each photon is routed,
/// kept with its detector's efficiency and smeared by Gaussian jitter.
/// Throws Error{Configuration} unless config.regime is Pulsed.
TagStream simulate_pulsed(const EmissionConfig& config, unsigned threads = 1);

/// CW pumping: pairs form a Poisson process at d mu_spdc / tau_coh and PL
/// photons an independent one at 2 d mu_pl / tau_coh over duration_ps.
/// Throws Error{Configuration} unless config.regime is Cw.
TagStream simulate_cw(const EmissionConfig& config, unsigned threads = 1);

/// Dispatch on config.regime.
TagStream simulate(const EmissionConfig& config, unsigned threads = 1);

}  // namespace pairdistill::sim
