#include "pairdistill/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pairdistill/error.hpp"

namespace pairdistill {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(std::string_view field, std::string_view what) {
    throw Error(ErrorCategory::ConfigParse, "field '" + std::string(field) + "': " + std::string(what));
}

template <typename T>
void read_number(const json& doc, const char* key, T& out, std::string_view prefix = {}) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    const std::string field = std::string(prefix) + key;
    if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) field_error(field, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (it->is_number_unsigned()) {
                out = it->get<T>();
            } else {
                const auto v = it->get<std::int64_t>();
                if (v < 0) field_error(field, "expected a non-negative integer");
                out = static_cast<T>(v);
            }
        } else {
            out = it->get<T>();
        }
    } else {
        if (!it->is_number()) field_error(field, "expected a number");
        out = it->get<T>();
    }
}

std::string read_string(const json& doc, const char* key, std::string fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_string()) field_error(key, "expected a string");
    return it->get<std::string>();
}

}  // namespace

json config_to_json(const EmissionConfig& c) {
    json pop = {
        {"mu_spdc", c.population.mu_spdc},
        {"mu_pl", c.population.mu_pl},
        {"modes", c.population.modes},
        {"n0", c.population.total_photons()},
    };
    const double per_mode = c.population.mu_spdc + c.population.mu_pl;
    pop["alpha"] = per_mode > 0.0 ? c.population.mu_spdc / per_mode : 0.0;
    return json{
        {"regime", regime_name(c.regime)},
        {"rep_rate_hz", c.rep_rate_hz},
        {"pulse_count", c.pulse_count},
        {"duration_ps", c.duration_ps},
        {"population", pop},
        {"pl_lifetime_ps", c.pl_lifetime_ps},
        {"detector_efficiency", {c.detector_efficiency[0], c.detector_efficiency[1]}},
        {"jitter_sigma_ps", c.jitter_sigma_ps},
        {"coincidence_window_ps", c.coincidence_window_ps},
        {"coherence_time_ps", c.coherence_time_ps},
        {"emission_delay_ps", c.emission_delay_ps},
        {"dark_count_rate_hz", c.dark_count_rate_hz},
        {"routing", routing_name(c.routing)},
        {"rng_seed", c.rng_seed},
    };
}

EmissionConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCategory::ConfigParse, "config must be a JSON object");
    EmissionConfig c;
    try {
        c.regime = parse_regime(read_string(doc, "regime", std::string(regime_name(c.regime))));
        c.routing = parse_routing(read_string(doc, "routing", std::string(routing_name(c.routing))));
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::ConfigParse) throw;
        throw Error(ErrorCategory::ConfigParse, e.what());
    }
    read_number(doc, "rep_rate_hz", c.rep_rate_hz);
    read_number(doc, "pulse_count", c.pulse_count);
    read_number(doc, "duration_ps", c.duration_ps);
    read_number(doc, "pl_lifetime_ps", c.pl_lifetime_ps);
    read_number(doc, "jitter_sigma_ps", c.jitter_sigma_ps);
    read_number(doc, "coincidence_window_ps", c.coincidence_window_ps);
    read_number(doc, "coherence_time_ps", c.coherence_time_ps);
    read_number(doc, "emission_delay_ps", c.emission_delay_ps);
    read_number(doc, "dark_count_rate_hz", c.dark_count_rate_hz);
    read_number(doc, "rng_seed", c.rng_seed);

    if (auto it = doc.find("detector_efficiency"); it != doc.end()) {
        if (it->is_number()) {
            c.detector_efficiency = {it->get<double>(), it->get<double>()};
        } else if (it->is_array() && it->size() == 2 && (*it)[0].is_number() && (*it)[1].is_number()) {
            c.detector_efficiency = {(*it)[0].get<double>(), (*it)[1].get<double>()};
        } else {
            field_error("detector_efficiency", "expected a number or a two-element array");
        }
    }

    if (auto it = doc.find("population"); it != doc.end()) {
        const json& pop = *it;
        if (!pop.is_object()) field_error("population", "expected an object");
        std::int64_t modes = c.population.modes;
        read_number(pop, "modes", modes, "population.");
        // With both forms present (as in a config echo) mu_spdc / mu_pl win and
        // alpha / n0 must agree with them.
        const bool by_mu = pop.contains("mu_spdc") || pop.contains("mu_pl");
        const bool by_mix = pop.contains("alpha") || pop.contains("n0");
        if (by_mix && !by_mu) {
            stats::MixtureParams mix{0.0, 0.0, modes};
            if (!pop.contains("alpha") || !pop.contains("n0")) field_error("population", "alpha and n0 go together");
            read_number(pop, "alpha", mix.alpha, "population.");
            read_number(pop, "n0", mix.n0, "population.");
            try {
                c.population = mix.to_population();
            } catch (const Error& e) {
                field_error("population", e.what());
            }
        } else {
            c.population.modes = modes;
            read_number(pop, "mu_spdc", c.population.mu_spdc, "population.");
            read_number(pop, "mu_pl", c.population.mu_pl, "population.");
            if (by_mix) {
                const double per_mode = c.population.mu_spdc + c.population.mu_pl;
                auto agrees = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
                double n0 = c.population.total_photons();
                read_number(pop, "n0", n0, "population.");
                if (!agrees(n0, c.population.total_photons())) field_error("population.n0", "disagrees with mu_spdc, mu_pl");
                if (per_mode > 0.0) {
                    double alpha = c.population.mu_spdc / per_mode;
                    read_number(pop, "alpha", alpha, "population.");
                    if (!agrees(alpha, c.population.mu_spdc / per_mode)) {
                        field_error("population.alpha", "disagrees with mu_spdc, mu_pl");
                    }
                }
            }
        }
    }

    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(ErrorCategory::ConfigParse, e.what());
    }
    return c;
}

json parse_json_text(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line:column.
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << what << " syntax error at line " << line << ", column " << col << ": " << e.what();
        throw Error(ErrorCategory::ConfigParse, msg.str());
    }
}

EmissionConfig parse_config_text(std::string_view text) { return config_from_json(parse_json_text(text)); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace pairdistill
