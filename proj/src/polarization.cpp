#include "pairdistill/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "pairdistill/error.hpp"

namespace pairdistill::polarization {

std::string_view label_name(ConfigLabel label) noexcept {
    switch (label) {
        case ConfigLabel::OToOO: return "o->oo";
        case ConfigLabel::OToOE: return "o->oe";
        case ConfigLabel::EToOO: return "e->oo";
        case ConfigLabel::EToEE: return "e->ee";
    }
    return "?";
}

std::string_view phase_matching_name(PhaseMatching type) noexcept {
    switch (type) {
        case PhaseMatching::Type0: return "type-0";
        case PhaseMatching::TypeI: return "type-I";
        case PhaseMatching::TypeII: return "type-II";
    }
    return "?";
}

ConfigLabel parse_label(std::string_view text) {
    for (auto label : {ConfigLabel::OToOO, ConfigLabel::OToOE, ConfigLabel::EToOO, ConfigLabel::EToEE}) {
        if (text == label_name(label)) return label;
    }
    throw Error(ErrorCategory::Domain, "unknown polarization configuration '" + std::string(text) + "'");
}

void NonlinearTensor::validate() const {
    if (!std::isfinite(d22) || !std::isfinite(d31) || !std::isfinite(d33)) {
        throw Error(ErrorCategory::Domain, "tensor components must be finite");
    }
}

double PolarizationConfig::delta_k() const noexcept { return std::numbers::pi / l_coh_um; }

std::vector<PolarizationConfig> default_configs(const NonlinearTensor& t) {
    t.validate();
    return {
        {ConfigLabel::OToOO, t.d22, 2.92, PhaseMatching::Type0},
        {ConfigLabel::OToOE, t.d31, 2.05, PhaseMatching::TypeII},
        {ConfigLabel::EToOO, t.d31, 185.0, PhaseMatching::TypeI},
        {ConfigLabel::EToEE, t.d33, 3.41, PhaseMatching::Type0},
    };
}

double coherence_length_um(double pump_um, double n_pump, double signal_um, double n_signal, double idler_um,
                           double n_idler) {
    if (!(pump_um > 0.0 && signal_um > 0.0 && idler_um > 0.0)) {
        throw Error(ErrorCategory::Domain, "wavelengths must be > 0");
    }
    const double dk = 2.0 * std::numbers::pi * (n_pump / pump_um - n_signal / signal_um - n_idler / idler_um);
    if (dk == 0.0) throw Error(ErrorCategory::Domain, "perfect phase matching: coherence length is infinite");
    return std::numbers::pi / std::abs(dk);
}

double sinc(double x) noexcept {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double efficiency(const PolarizationConfig& config, double thickness_um) {
    if (!(thickness_um > 0.0)) throw Error(ErrorCategory::Domain, "thickness must be > 0");
    if (!(config.l_coh_um > 0.0)) throw Error(ErrorCategory::Domain, "coherence length must be > 0");
    const double s = sinc(std::numbers::pi * thickness_um / (2.0 * config.l_coh_um));
    return config.chi_eff * config.chi_eff * thickness_um * thickness_um * s * s;
}

std::vector<EfficiencyEntry> efficiency_table(const std::vector<PolarizationConfig>& configs, double thickness_um) {
    std::vector<EfficiencyEntry> table;
    table.reserve(configs.size());
    double max_eps = 0.0;
    for (const auto& c : configs) {
        table.push_back({c.label, efficiency(c, thickness_um), 0.0});
        max_eps = std::max(max_eps, table.back().epsilon);
    }
    for (auto& e : table) e.normalized = max_eps > 0.0 ? e.epsilon / max_eps : 0.0;
    std::stable_sort(table.begin(), table.end(),
                     [](const EfficiencyEntry& a, const EfficiencyEntry& b) { return a.epsilon > b.epsilon; });
    return table;
}

ThicknessSweep thickness_sweep(const std::vector<PolarizationConfig>& configs, double l_min_um, double l_max_um,
                               std::size_t steps) {
    if (steps < 2) throw Error(ErrorCategory::Domain, "sweep needs at least two samples");
    if (!(l_min_um >= 0.0 && l_max_um > l_min_um)) throw Error(ErrorCategory::Domain, "sweep needs 0 <= l_min < l_max");
    ThicknessSweep sweep;
    sweep.thickness_um.resize(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        sweep.thickness_um[i] = l_min_um + (l_max_um - l_min_um) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    for (const auto& c : configs) {
        sweep.labels.push_back(c.label);
        std::vector<double>& curve = sweep.epsilon.emplace_back(steps, 0.0);
        for (std::size_t i = 0; i < steps; ++i) {
            const double l = sweep.thickness_um[i];
            curve[i] = l > 0.0 ? efficiency(c, l) : 0.0;
        }
    }
    return sweep;
}

NonlinearTensor tensor_from_json(const nlohmann::json& doc) {
    NonlinearTensor t;
    if (doc.is_null()) return t;
    if (!doc.is_object()) throw Error(ErrorCategory::ConfigParse, "tensor must be a JSON object");
    auto read = [&doc](const char* key, double& out) {
        auto it = doc.find(key);
        if (it == doc.end()) return;
        if (!it->is_number()) throw Error(ErrorCategory::ConfigParse, std::string("field '") + key + "': expected a number");
        out = it->get<double>();
    };
    read("d22", t.d22);
    read("d31", t.d31);
    read("d33", t.d33);
    t.validate();
    return t;
}

nlohmann::json to_json(const std::vector<EfficiencyEntry>& table, double thickness_um) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : table) {
        rows.push_back({{"config", label_name(e.label)}, {"epsilon", e.epsilon}, {"normalized", e.normalized}});
    }
    return {{"thickness_um", thickness_um}, {"table", rows}};
}

void write_csv(const std::vector<EfficiencyEntry>& table, std::ostream& out) {
    out << "config,epsilon,normalized\n";
    for (const auto& e : table) out << label_name(e.label) << ',' << e.epsilon << ',' << e.normalized << '\n';
}

void write_csv(const ThicknessSweep& sweep, std::ostream& out) {
    out << "thickness_um";
    for (auto label : sweep.labels) out << ',' << label_name(label);
    out << '\n';
    for (std::size_t i = 0; i < sweep.thickness_um.size(); ++i) {
        out << sweep.thickness_um[i];
        for (const auto& curve : sweep.epsilon) out << ',' << curve[i];
        out << '\n';
    }
}

}  // namespace pairdistill::polarization
