// oracles.hpp: analytic references for IBM dephasing, the variational renormalized gap and golden-rule rate limits

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "ttedopa/errors.hpp"
#include "ttedopa/quadrature.hpp"
#include "ttedopa/spectral.hpp"

namespace ttedopa::oracles {

// Γ_d(t) = 4 ∫_0^{ω_c} J(ω) coth(βω/2) (1 - cos ωt)/ω² dω  for H_I = σ_z ⊗ ∫√J (a + a†).
inline double ibm_decoherence(const SpectralDensity& J, double beta, double t, double tol = 1e-12) {
    if (!(beta > 0.0)) throw InvalidInput("ibm_decoherence: beta must be positive");
    auto integrand = [&](double w) {
        const double th = std::isinf(beta) ? 1.0 : 1.0 / std::tanh(0.5 * beta * w);
        const double s = std::sin(0.5 * w * t);
        return J(w) * th * 2.0 * s * s / (w * w);
    };
    quad::AdaptiveOptions opt;
    opt.tolerance = tol;
    return 4.0 * quad::integrate(integrand, 0.0, J.cutoff(), opt);
}

// Same functional for a discrete set of modes with couplings g_k (H_I = σ_z Σ g_k (a_k + a_k†)).
inline double ibm_decoherence_discrete(const std::vector<double>& omegas, const std::vector<double>& couplings,
                                       double beta, double t) {
    double g = 0.0;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        const double w = omegas[k];
        const double th = std::isinf(beta) ? 1.0 : 1.0 / std::tanh(0.5 * beta * w);
        const double s = std::sin(0.5 * w * t);
        g += couplings[k] * couplings[k] * th * 2.0 * s * s / (w * w);
    }
    return 4.0 * g;
}

// ⟨σ_x(t)⟩ for the IBM started in (|↑⟩+|↓⟩)/√2.
inline double ibm_coherence(const SpectralDensity& J, double beta, double omega_0, double t) {
    return std::cos(omega_0 * t) * std::exp(-ibm_decoherence(J, beta, t));
}

// ω_0^r = ω_0 (ω_0/ω_c)^{α/(1-α)}
inline double renormalized_gap(double omega_0, double alpha, double omega_c = 1.0) {
    if (alpha < 0.0 || alpha >= 1.0) throw InvalidInput("renormalized_gap: need 0 <= alpha < 1");
    return omega_0 * std::pow(omega_0 / omega_c, alpha / (1.0 - alpha));
}

struct GoldenRuleParams {
    double epsilon{0.2};
    double alpha{0.8};
    double beta{1.0};
    double omega_c{1.0};

    // ε ≪ ω_c and ε ≪ λ_R; not enforced, callers may warn.
    bool non_adiabatic() const { return epsilon < 0.5 * omega_c && epsilon < 0.5 * 2.0 * alpha * omega_c; }
};

enum class Regime { LowT, HighT };

// Golden-rule limits for the Ohmic ET model, rates in units of ω_c.
//   LowT  (βω_c ≫ 1): √π/(4√α) ε² (π/(βω_c))^{2α-1}
//   HighT (βω_c ≪ 1): ε²/4 √(πβω_c/(2α)) exp(-αβω_c/2)
inline double golden_rule_rate(const GoldenRuleParams& p, Regime regime) {
    const double bw = p.beta * p.omega_c;
    const double e2 = p.epsilon * p.epsilon;
    if (regime == Regime::LowT)
        return std::sqrt(std::numbers::pi) / (4.0 * std::sqrt(p.alpha)) * e2 *
               std::pow(std::numbers::pi / bw, 2.0 * p.alpha - 1.0);
    return 0.25 * e2 * std::sqrt(std::numbers::pi * bw / (2.0 * p.alpha)) * std::exp(-0.5 * p.alpha * bw);
}

} // namespace ttedopa::oracles
