#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "pairdistill/emission_config.hpp"

namespace pairdistill {

/// Config echo with every field resolved, including the derived alpha / N0.
nlohmann::json config_to_json(const EmissionConfig& config);

/// Missing fields keep their defaults. The population block accepts either
/// {mu_spdc, mu_pl, modes} or {alpha, n0, modes}; when both appear, the mu
/// form is used and alpha / n0 must match it.
/// Throws Error{ConfigParse} naming the offending field.
EmissionConfig config_from_json(const nlohmann::json& doc);

/// Parses JSON text; syntax errors report line and column.
EmissionConfig parse_config_text(std::string_view text);
nlohmann::json parse_json_text(std::string_view text, std::string_view what = "config");

std::string read_text_file(const std::string& path);

}  // namespace pairdistill
