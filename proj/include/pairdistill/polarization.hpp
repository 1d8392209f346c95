#pragma once

// Relative SPDC efficiency of the polarization configurations of an X-cut
// lithium niobate film:
//
//     eps = chi_eff^2 L^2 sinc^2(pi L / (2 L_coh)),   sinc(x) = sin(x) / x.
//
// The unnormalized sinc is used, so eps vanishes at L = 2 k L_coh. Units are
// pm/V for chi_eff and micrometers for lengths; eps is in (pm/V)^2 um^2 and
// only ratios between configurations are meaningful.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pairdistill::polarization {

struct NonlinearTensor {
    double d22 = 2.1;
    double d31 = -4.3;
    double d33 = -34.0;

    void validate() const;
};

/// Pump polarization -> signal, idler polarizations.
enum class ConfigLabel { OToOO, OToOE, EToOO, EToEE };
enum class PhaseMatching { Type0, TypeI, TypeII };

std::string_view label_name(ConfigLabel label) noexcept;  // "o->oo", ...
std::string_view phase_matching_name(PhaseMatching type) noexcept;
ConfigLabel parse_label(std::string_view text);

struct PolarizationConfig {
    ConfigLabel label = ConfigLabel::EToOO;
    double chi_eff = 0.0;  // pm/V
    double l_coh_um = 1.0;
    PhaseMatching phase_matching = PhaseMatching::TypeI;

    /// Longitudinal mismatch pi / L_coh in 1/um.
    double delta_k() const noexcept;
};

/// The four X-cut configurations with tabulated coherence lengths at the
/// degenerate point (532 nm pump): o->oo d22 2.92 um, o->oe d31 2.05 um,
/// e->oo d31 185 um, e->ee d33 3.41 um.
std::vector<PolarizationConfig> default_configs(const NonlinearTensor& tensor = {});

/// Coherence length pi / |dk| with dk = 2 pi (n_p/l_p - n_s/l_s - n_i/l_i),
/// wavelengths in um. Hook for user-supplied refractive indices.
double coherence_length_um(double pump_um, double n_pump, double signal_um, double n_signal, double idler_um,
                           double n_idler);

/// sin(x)/x with the removable singularity filled.
double sinc(double x) noexcept;

/// Throws Error{Domain} for thickness <= 0.
double efficiency(const PolarizationConfig& config, double thickness_um);

struct EfficiencyEntry {
    ConfigLabel label = ConfigLabel::EToOO;
    double epsilon = 0.0;
    double normalized = 0.0;  // epsilon / max epsilon
};

/// Efficiencies at one thickness, normalized to the strongest, sorted descending.
std::vector<EfficiencyEntry> efficiency_table(const std::vector<PolarizationConfig>& configs, double thickness_um);

struct ThicknessSweep {
    std::vector<double> thickness_um;
    std::vector<ConfigLabel> labels;
    std::vector<std::vector<double>> epsilon;  // [config][sample]
};

/// eps(L) on `steps` evenly spaced samples over [l_min, l_max]. Samples at
/// L = 0 report 0.
ThicknessSweep thickness_sweep(const std::vector<PolarizationConfig>& configs, double l_min_um, double l_max_um,
                               std::size_t steps);

NonlinearTensor tensor_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const std::vector<EfficiencyEntry>& table, double thickness_um);
void write_csv(const std::vector<EfficiencyEntry>& table, std::ostream& out);
/// Columns: thickness_um, then one epsilon column per configuration.
void write_csv(const ThicknessSweep& sweep, std::ostream& out);

}  // namespace pairdistill::polarization
