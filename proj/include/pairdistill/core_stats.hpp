#pragma once

// Closed-form photon statistics of an SPDC / photoluminescence mixture.
//
// Model: d pairwise-correlated mode pairs, each carrying a two-mode squeezed
// vacuum with mu_spdc photons per mode, plus thermal photoluminescence spread
// equally over the same 2d modes with mu_pl photons per mode. All modes are
// equally populated. "Arm" 1 and 2 are the two halves of each conjugate pair.

#include <cstdint>

namespace pairdistill::stats {

struct ModePopulation {
    double mu_spdc = 0.0;
    double mu_pl = 0.0;
    std::int64_t modes = 1;

    /// N0 = d (mu_spdc + mu_pl): mean photon number per arm.
    double total_photons() const noexcept { return static_cast<double>(modes) * (mu_spdc + mu_pl); }

    /// Throws Error{Domain} when a field is out of range or non-finite.
    void validate() const;
};

struct MixtureParams {
    double alpha = 0.0;  // SPDC fraction of all photons
    double n0 = 0.0;     // total mean photon number per arm
    std::int64_t modes = 1;

    /// kappa = (1 + alpha N0/d) / (1 + (1 - alpha) N0/d)^2, the multimode correction.
    double kappa() const noexcept;

    void validate() const;

    static MixtureParams from_population(const ModePopulation& pop);
    ModePopulation to_population() const;
};

/// p = alpha / (alpha + (1 - alpha)^2 N0). Throws DegenerateInput at alpha = N0 = 0.
double p_simple(const MixtureParams& params);

/// Tr(rho^2) = p^2 (1 - 1/d^2) + 1/d^2.
double purity_from_p(double p, std::int64_t modes);

/// Multimode pure-pair probability alpha / (alpha + (1 - alpha)^2 N0 kappa).
double p_rigorous(const ModePopulation& pop);
double p_rigorous(const MixtureParams& params);

/// Single mode-pair generating functions and the full multimode product.
/// The formal variables follow Q(x) = sum_n P(n) (1 + x)^n.
double q_spdc(double x, double y, const ModePopulation& pop);
double q_pl(double x, double y, const ModePopulation& pop);
double q_total(double x, double y, const ModePopulation& pop);

/// Probability of exactly one photon in each arm:
/// (1+mu_s)^-d (1+mu_pl)^-2d [d mu_s/(1+mu_s) + (d mu_pl/(1+mu_pl))^2].
double pair_probability(const ModePopulation& pop);

/// The two terms of pair_probability: pair from SPDC with PL vacuum, and
/// two PL photons with SPDC vacuum.
struct PairProbabilityTerms {
    double spdc_pair = 0.0;
    double pl_pair = 0.0;
    double total() const noexcept { return spdc_pair + pl_pair; }
};
PairProbabilityTerms pair_probability_terms(const ModePopulation& pop);

struct G2Theory {
    double exact = 1.0;   // 1 + mu_s^2/(d mu^2) + mu_s/(d mu^2)
    double approx = 1.0;  // 1 + alpha/N0
};

/// Normalized cross-arm second-order correlation. Throws DegenerateInput
/// when mu_spdc + mu_pl = 0.
G2Theory g2_theory(const ModePopulation& pop);

}  // namespace pairdistill::stats
