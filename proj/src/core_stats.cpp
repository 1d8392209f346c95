#include "pairdistill/core_stats.hpp"

#include <cmath>
#include <sstream>

#include "pairdistill/error.hpp"

namespace pairdistill::stats {

namespace {

[[noreturn]] void domain_error(const std::string& what) { throw Error(ErrorCategory::Domain, what); }

// (1 + mu)^(-power), evaluated in log space so that large mode counts
// do not underflow before the final exponentiation.
double inverse_power(double mu, double power) { return std::exp(-power * std::log1p(mu)); }

}  // namespace

void ModePopulation::validate() const {
    if (!std::isfinite(mu_spdc) || mu_spdc < 0.0) domain_error("mu_spdc must be finite and >= 0");
    if (!std::isfinite(mu_pl) || mu_pl < 0.0) domain_error("mu_pl must be finite and >= 0");
    if (modes < 1) domain_error("mode count must be >= 1");
    if (!std::isfinite(total_photons())) domain_error("total photon number is not finite");
}

double MixtureParams::kappa() const noexcept {
    const double per_mode = n0 / static_cast<double>(modes);
    const double denom = 1.0 + (1.0 - alpha) * per_mode;
    return (1.0 + alpha * per_mode) / (denom * denom);
}

void MixtureParams::validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) domain_error("alpha must lie in [0, 1]");
    if (!std::isfinite(n0) || n0 < 0.0) domain_error("N0 must be finite and >= 0");
    if (modes < 1) domain_error("mode count must be >= 1");
}

MixtureParams MixtureParams::from_population(const ModePopulation& pop) {
    pop.validate();
    const double per_mode = pop.mu_spdc + pop.mu_pl;
    if (per_mode == 0.0) {
        throw Error(ErrorCategory::DegenerateInput, "vacuum population: alpha is undefined");
    }
    return MixtureParams{pop.mu_spdc / per_mode, pop.total_photons(), pop.modes};
}

ModePopulation MixtureParams::to_population() const {
    validate();
    const double per_mode = n0 / static_cast<double>(modes);
    return ModePopulation{alpha * per_mode, (1.0 - alpha) * per_mode, modes};
}

double p_simple(const MixtureParams& params) {
    params.validate();
    if (params.alpha == 0.0 && params.n0 == 0.0) {
        throw Error(ErrorCategory::DegenerateInput, "p is 0/0 at alpha = N0 = 0");
    }
    const double noise = (1.0 - params.alpha) * (1.0 - params.alpha) * params.n0;
    return params.alpha / (params.alpha + noise);
}

double purity_from_p(double p, std::int64_t modes) {
    if (!(p >= 0.0 && p <= 1.0)) domain_error("p must lie in [0, 1]");
    if (modes < 1) domain_error("mode count must be >= 1");
    const double inv_d2 = 1.0 / (static_cast<double>(modes) * static_cast<double>(modes));
    return p * p * (1.0 - inv_d2) + inv_d2;
}

double p_rigorous(const MixtureParams& params) {
    params.validate();
    if (params.alpha == 0.0 && params.n0 == 0.0) {
        throw Error(ErrorCategory::DegenerateInput, "p is 0/0 at alpha = N0 = 0");
    }
    const double noise = (1.0 - params.alpha) * (1.0 - params.alpha) * params.n0 * params.kappa();
    return params.alpha / (params.alpha + noise);
}

double p_rigorous(const ModePopulation& pop) { return p_rigorous(MixtureParams::from_population(pop)); }

double q_spdc(double x, double y, const ModePopulation& pop) {
    pop.validate();
    const double denom = 1.0 - pop.mu_spdc * (x + y + x * y);
    if (!(denom > 0.0)) {
        std::ostringstream msg;
        msg << "Q_SPDC diverges at (" << x << ", " << y << ")";
        throw Error(ErrorCategory::Divergence, msg.str());
    }
    return 1.0 / denom;
}

double q_pl(double x, double y, const ModePopulation& pop) {
    pop.validate();
    const double denom = (1.0 - pop.mu_pl * x) * (1.0 - pop.mu_pl * y);
    if (!(1.0 - pop.mu_pl * x > 0.0) || !(1.0 - pop.mu_pl * y > 0.0)) {
        std::ostringstream msg;
        msg << "Q_PL diverges at (" << x << ", " << y << ")";
        throw Error(ErrorCategory::Divergence, msg.str());
    }
    return 1.0 / denom;
}

double q_total(double x, double y, const ModePopulation& pop) {
    const double per_pair = q_spdc(x, y, pop) * q_pl(x, y, pop);
    return std::exp(static_cast<double>(pop.modes) * std::log(per_pair));
}

PairProbabilityTerms pair_probability_terms(const ModePopulation& pop) {
    pop.validate();
    const double d = static_cast<double>(pop.modes);
    const double spdc_vacuum = inverse_power(pop.mu_spdc, d);
    const double pl_vacuum = inverse_power(pop.mu_pl, 2.0 * d);
    const double spdc_one = d * pop.mu_spdc / (1.0 + pop.mu_spdc);
    const double pl_one = d * pop.mu_pl / (1.0 + pop.mu_pl);
    return PairProbabilityTerms{spdc_vacuum * pl_vacuum * spdc_one, spdc_vacuum * pl_vacuum * pl_one * pl_one};
}

double pair_probability(const ModePopulation& pop) { return pair_probability_terms(pop).total(); }

G2Theory g2_theory(const ModePopulation& pop) {
    pop.validate();
    const double mu = pop.mu_spdc + pop.mu_pl;
    if (mu == 0.0) throw Error(ErrorCategory::DegenerateInput, "g2 undefined for vacuum (mu_spdc + mu_pl = 0)");
    const double d = static_cast<double>(pop.modes);
    const double denom = d * mu * mu;
    G2Theory out;
    out.exact = 1.0 + pop.mu_spdc * pop.mu_spdc / denom + pop.mu_spdc / denom;
    out.approx = 1.0 + (pop.mu_spdc / mu) / pop.total_photons();
    return out;
}

}  // namespace pairdistill::stats
