// spectral.hpp: Spectral densities, their thermalized extension and bath correlation functions

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ttedopa/errors.hpp"
#include "ttedopa/quadrature.hpp"

namespace ttedopa {

using cplx = std::complex<double>;

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

// --------------------------- Physical spectral density ---------------------------

enum class SpectralKind { OhmicHardCutoff, Tabulated };

// J(ω) on the support [0, ω_c]. The Ohmic form is 2αω_c(ω/ω_c)^s with a hard cutoff at ω_c.
struct SpectralDensity {
    SpectralKind kind{SpectralKind::OhmicHardCutoff};
    double alpha{0.1};
    double s{1.0};
    double omega_c{1.0};
    std::vector<std::pair<double, double>> table;   // (ω, J) samples, Tabulated only

    static SpectralDensity ohmic(double alpha, double s = 1.0, double omega_c = 1.0) {
        SpectralDensity J;
        J.alpha = alpha;
        J.s = s;
        J.omega_c = omega_c;
        return J;
    }

    static SpectralDensity tabulated(std::vector<std::pair<double, double>> samples) {
        if (samples.size() < 2) throw InvalidInput("tabulated spectral density needs at least 2 samples");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!(samples[i].first > samples[i - 1].first))
                throw InvalidInput("tabulated spectral density: frequencies must be strictly increasing");
        for (const auto& [w, j] : samples)
            if (w < 0.0 || j < 0.0) throw InvalidInput("tabulated spectral density: negative ω or J");
        SpectralDensity J;
        J.kind = SpectralKind::Tabulated;
        J.alpha = 0.0;
        J.omega_c = samples.back().first;
        J.table = std::move(samples);
        return J;
    }

    double cutoff() const noexcept { return omega_c; }

    // J(ω); zero outside [0, ω_c].
    double operator()(double omega) const {
        if (kind == SpectralKind::Tabulated) {
            if (table.size() < 2) throw InvalidInput("tabulated spectral density needs at least 2 samples");
            if (omega < table.front().first || omega > table.back().first) return 0.0;
            auto it = std::upper_bound(table.begin(), table.end(), omega,
                                       [](double w, const auto& p) { return w < p.first; });
            if (it == table.end()) return table.back().second;
            auto prev = std::prev(it);
            const double f = (omega - prev->first) / (it->first - prev->first);
            return prev->second + f * (it->second - prev->second);
        }
        if (omega < 0.0 || omega > omega_c) return 0.0;
        return 2.0 * alpha * omega_c * std::pow(omega / omega_c, s);
    }

    // lim_{ω→0+} J(ω)/ω, needed for the removable singularity of J_β at ω = 0.
    double slope_at_zero() const {
        if (kind == SpectralKind::Tabulated) {
            const auto& [w0, j0] = table.front();
            if (w0 > 0.0) return 0.0;
            if (j0 > 0.0) return std::numeric_limits<double>::infinity();
            const auto& [w1, j1] = table[1];
            return (j1 - j0) / (w1 - w0);
        }
        if (s == 1.0) return 2.0 * alpha;
        return s > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
};

inline double evaluate_physical(const SpectralDensity& J, double omega) { return J(omega); }

// Two-column CSV with header `omega,J`.
inline SpectralDensity load_spectral_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spectral density file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty spectral density file: " + path);
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r'; }), line.end());
    if (line != "omega,J") throw InvalidInput("spectral density CSV must start with header `omega,J`: " + path);
    std::vector<std::pair<double, double>> samples;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw InvalidInput("malformed row in " + path + ": " + line);
        samples.emplace_back(std::stod(a), std::stod(b));
    }
    return SpectralDensity::tabulated(std::move(samples));
}

// --------------------------- Thermalized spectral density ---------------------------

// J_β(ω) = sign(ω) J(|ω|)/2 (1 + coth(βω/2)) on [-ω_c, ω_c].
// Evaluated as J(ω)/(1 - e^{-βω}) for ω > 0 and J(|ω|)/(e^{β|ω|} - 1) for ω < 0 so that
// the detailed-balance ratio is exact to rounding.
struct ThermalizedSpectralDensity {
    SpectralDensity base;
    double beta{kInfiniteBeta};

    bool zero_temperature() const noexcept { return std::isinf(beta); }
    double lower() const noexcept { return zero_temperature() ? 0.0 : -base.cutoff(); }
    double upper() const noexcept { return base.cutoff(); }

    double operator()(double omega) const {
        const double wc = base.cutoff();
        if (omega > wc || omega < -wc) return 0.0;
        if (zero_temperature()) return omega > 0.0 ? base(omega) : 0.0;
        if (omega == 0.0) {
            const double slope = base.slope_at_zero();
            return std::isinf(slope) ? slope : slope / beta;
        }
        if (omega > 0.0) return base(omega) / -std::expm1(-beta * omega);
        return base(-omega) / std::expm1(-beta * omega);
    }
};

inline ThermalizedSpectralDensity thermalize(const SpectralDensity& J, double beta) {
    if (!(beta > 0.0)) throw InvalidInput("thermalize: beta must be positive or +infinity");
    return ThermalizedSpectralDensity{J, beta};
}

// --------------------------- Correlation functions ---------------------------

struct CorrelationFunction {
    std::vector<std::pair<double, cplx>> samples;
    double quadrature_tolerance{1e-10};
};

// S(t) = ∫_0^{ω_c} J(ω)[e^{-iωt}(1+n_β(ω)) + e^{iωt} n_β(ω)] dω
//      = ∫_0^{ω_c} J(ω)[cos(ωt) coth(βω/2) - i sin(ωt)] dω.
inline cplx bath_correlation_thermal(const SpectralDensity& J, double beta, double t, double tol = 1e-10) {
    if (!(beta > 0.0)) throw InvalidInput("bath_correlation_thermal: beta must be positive");
    auto integrand = [&](double w) -> cplx {
        const double j = J(w);
        if (j == 0.0) return {0.0, 0.0};
        const double c = std::isinf(beta) ? 1.0 : 1.0 / std::tanh(0.5 * beta * w);
        return {j * std::cos(w * t) * c, -j * std::sin(w * t)};
    };
    quad::AdaptiveOptions opt;
    opt.tolerance = tol;
    return quad::integrate<cplx>(integrand, 0.0, J.cutoff(), opt);
}

// S(t) = ∫_{-ω_c}^{ω_c} J_β(ω) e^{-iωt} dω, split at ω = 0.
inline cplx bath_correlation_extended(const ThermalizedSpectralDensity& Jb, double t, double tol = 1e-10) {
    auto integrand = [&](double w) -> cplx { return Jb(w) * std::exp(cplx(0.0, -w * t)); };
    quad::AdaptiveOptions opt;
    opt.tolerance = 0.5 * tol;
    cplx s = quad::integrate<cplx>(integrand, 0.0, Jb.upper(), opt);
    if (!Jb.zero_temperature()) s += quad::integrate<cplx>(integrand, Jb.lower(), 0.0, opt);
    return s;
}

inline CorrelationFunction sample_correlation(const SpectralDensity& J, double beta, const std::vector<double>& times,
                                              double tol = 1e-10) {
    CorrelationFunction c;
    c.quadrature_tolerance = tol;
    c.samples.reserve(times.size());
    for (double t : times) c.samples.emplace_back(t, bath_correlation_thermal(J, beta, t, tol));
    return c;
}

} // namespace ttedopa
