// observables.hpp: Local expectations, chain correlations and bath occupation spectra

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ttedopa/chainmap.hpp"
#include "ttedopa/errors.hpp"
#include "ttedopa/tensor/mpo.hpp"
#include "ttedopa/tensor/mps.hpp"

namespace ttedopa {

struct RunResult {
    std::vector<double> times;
    std::vector<double> sigma_x, sigma_y, sigma_z;
    std::vector<std::vector<double>> chain_occupation;   // [time][chain mode]
    std::vector<double> total_occupation;
    std::vector<double> energy;
    std::vector<double> norm;
    std::vector<std::size_t> chain_length;
    std::vector<std::pair<double, cmat>> correlation_matrices;
    nlohmann::json metadata = nlohmann::json::object();
};

struct BathSpectrum {
    std::vector<double> omegas;
    std::vector<double> n_omega;
    std::vector<double> n_thermal;   // physical occupations on ω > 0, NaN elsewhere; empty if not computed
};

namespace detail {

// Identity-transfer environments: left[i] covers sites < i, right[i] covers sites > i.
struct NormEnvironments {
    std::vector<cmat> left, right;
};

inline NormEnvironments norm_environments(const MpsState& psi) {
    const std::size_t n = psi.size();
    NormEnvironments e;
    e.left.assign(n, cmat());
    e.right.assign(n, cmat());
    e.left[0] = cmat::Ones(1, 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& a = psi.sites[i];
        cmat next = cmat::Zero(a.dr(), a.dr());
        for (Index s = 0; s < a.d(); ++s) next.noalias() += a[s].adjoint() * e.left[i] * a[s];
        e.left[i + 1] = std::move(next);
    }
    e.right[n - 1] = cmat::Ones(1, 1);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto& a = psi.sites[i];
        cmat next = cmat::Zero(a.dl(), a.dl());
        for (Index s = 0; s < a.d(); ++s) next.noalias() += a[s].conjugate() * e.right[i] * a[s].transpose();
        e.right[i - 1] = std::move(next);
    }
    return e;
}

// M(s', s) = tr(A[s']† L A[s] R^T)
inline cmat site_moments(const SiteTensor& a, const cmat& left, const cmat& right) {
    cmat m(a.d(), a.d());
    std::vector<cmat> la(static_cast<std::size_t>(a.d()));
    for (Index s = 0; s < a.d(); ++s) la[static_cast<std::size_t>(s)] = left * a[s] * right.transpose();
    for (Index sp = 0; sp < a.d(); ++sp)
        for (Index s = 0; s < a.d(); ++s)
            m(sp, s) = (a[sp].conjugate().array() * la[static_cast<std::size_t>(s)].array()).sum();
    return m;
}

inline double norm_squared_from(const NormEnvironments& e, const MpsState& psi) {
    return site_moments(psi.sites[0], e.left[0], e.right[0]).trace().real();
}

} // namespace detail

// Single-site reduced density matrix ρ(s, s'), normalized.
inline cmat reduced_density_matrix(const MpsState& psi, std::size_t site) {
    if (site >= psi.size()) throw InvalidInput("reduced_density_matrix: site out of range");
    const auto e = detail::norm_environments(psi);
    const cmat m = detail::site_moments(psi.sites[site], e.left[site], e.right[site]);
    return m.transpose() / m.trace().real();
}

inline std::vector<cmat> all_reduced_density_matrices(const MpsState& psi) {
    const auto e = detail::norm_environments(psi);
    std::vector<cmat> out;
    out.reserve(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const cmat m = detail::site_moments(psi.sites[i], e.left[i], e.right[i]);
        out.push_back(m.transpose() / m.trace().real());
    }
    return out;
}

// ⟨ψ|O_site|ψ⟩/⟨ψ|ψ⟩, exact contraction.
inline std::complex<double> measure_local(const MpsState& psi, const cmat& op, std::size_t site) {
    if (site >= psi.size()) throw InvalidInput("measure_local: site out of range");
    if (op.rows() != psi.sites[site].d() || op.cols() != psi.sites[site].d())
        throw InvalidInput("measure_local: operator dimension " + std::to_string(op.rows()) +
                           " does not match local dimension " + std::to_string(psi.sites[site].d()));
    const cmat rho = reduced_density_matrix(psi, site);
    return (op * rho).trace();
}

// C_nm = ⟨c_n† c_m⟩ for MPS sites first..last (inclusive), one sweep per row with cached environments.
inline cmat chain_correlation_matrix(const MpsState& psi, std::size_t first, std::size_t last) {
    if (first < 1 || last >= psi.size() || first > last)
        throw InvalidInput("chain_correlation_matrix: invalid site range");
    const auto e = detail::norm_environments(psi);
    const double nrm = detail::norm_squared_from(e, psi);
    const auto count = static_cast<Index>(last - first + 1);
    cmat c = cmat::Zero(count, count);

    for (std::size_t n = first; n <= last; ++n) {
        const auto& an = psi.sites[n];
        const cmat cd = ladder::creation(an.d());
        const cmat num = ladder::number(an.d());
        const auto i = static_cast<Index>(n - first);
        c(i, i) = (num.array() * detail::site_moments(an, e.left[n], e.right[n]).array()).sum();

        // Open environment with c† applied at site n.
        cmat open = cmat::Zero(an.dr(), an.dr());
        for (Index sp = 0; sp < an.d(); ++sp)
            for (Index s = 0; s < an.d(); ++s)
                if (cd(sp, s) != 0.0) open.noalias() += cd(sp, s) * (an[sp].adjoint() * e.left[n] * an[s]);

        for (std::size_t m = n + 1; m <= last; ++m) {
            const auto& am = psi.sites[m];
            const cmat a = ladder::annihilation(am.d());
            const cmat mom = detail::site_moments(am, open, e.right[m]);
            const auto j = static_cast<Index>(m - first);
            c(i, j) = (a.array() * mom.array()).sum();
            c(j, i) = std::conj(c(i, j));
            if (m == last) break;
            cmat next = cmat::Zero(am.dr(), am.dr());
            for (Index s = 0; s < am.d(); ++s) next.noalias() += am[s].adjoint() * open * am[s];
            open = std::move(next);
        }
    }
    return c / nrm;
}

// n(ω) = Σ_nm U_n(ω) C_nm U_m(ω).
inline BathSpectrum bath_spectrum(const cmat& c, const TransformKernel& kernel) {
    if (c.rows() != c.cols()) throw InvalidInput("bath_spectrum: correlation matrix must be square");
    if (static_cast<Index>(kernel.sites()) < c.rows())
        throw InvalidInput("bath_spectrum: kernel has " + std::to_string(kernel.sites()) +
                           " sites but the correlation matrix has " + std::to_string(c.rows()));
    BathSpectrum out;
    out.omegas = kernel.grid;
    out.n_omega.resize(kernel.grid.size());
    const Eigen::MatrixXd u = kernel.values.topRows(c.rows());
    const Eigen::MatrixXd cre = c.real();
    for (Index g = 0; g < u.cols(); ++g) {
        const Eigen::VectorXd col = u.col(g);
        out.n_omega[static_cast<std::size_t>(g)] = col.dot(cre * col);
    }
    return out;
}

// n_β(ω) = n(ω) - n(-ω) for ω > 0.
inline BathSpectrum physical_occupation(BathSpectrum spec, double tol = 1e-9) {
    const std::size_t g = spec.omegas.size();
    spec.n_thermal.assign(g, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < g; ++i) {
        const double w = spec.omegas[i];
        const double mirror = spec.omegas[g - 1 - i];
        if (std::abs(w + mirror) > tol * std::max(1.0, std::abs(w)))
            throw InvalidInput("physical_occupation: frequency grid is not symmetric about 0");
        if (w > 0.0) spec.n_thermal[i] = spec.n_omega[i] - spec.n_omega[g - 1 - i];
    }
    return spec;
}

// ∫ n(ω) dω with the kernel's quadrature weights.
inline double integrated_occupation(const BathSpectrum& spec, const TransformKernel& kernel) {
    if (kernel.weights.size() != spec.n_omega.size())
        throw InvalidInput("integrated_occupation: kernel has no matching quadrature weights");
    double s = 0.0;
    for (std::size_t i = 0; i < spec.n_omega.size(); ++i) s += kernel.weights[i] * spec.n_omega[i];
    return s;
}

struct Peak {
    double omega;
    double value;
};

// Discrete maximum refined by the parabola through it and its two neighbours.
inline std::optional<Peak> find_peak(const std::vector<double>& x, const std::vector<double>& y, bool positive_side,
                                     double floor) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (positive_side ? !(x[i] > 0.0) : !(x[i] < 0.0)) continue;
        if (!best || y[i] > y[*best]) best = i;
    }
    if (!best || !(y[*best] > floor)) return std::nullopt;
    const std::size_t i = *best;
    const bool has_l = i > 0 && (positive_side ? x[i - 1] > 0.0 : x[i - 1] < 0.0);
    const bool has_r = i + 1 < x.size() && (positive_side ? x[i + 1] > 0.0 : x[i + 1] < 0.0);
    if (!has_l || !has_r) return Peak{x[i], y[i]};
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double a = (d12 - d01) / (x2 - x0);
    if (!(a < 0.0)) return Peak{x1, y1};
    // Newton form p(x) = y0 + d01 (x - x0) + a (x - x0)(x - x1).
    const double xv = std::clamp(0.5 * (x0 + x1) - d01 / (2.0 * a), x0, x2);
    const double newton = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
    return Peak{xv, newton};
}

struct PeakRatio {
    double omega_p;
    double omega_n;
    double n_p;
    double n_n;
    double ratio;   // (n(ω_p) + 1) / n(ω_n)
};

// Positive- and negative-frequency maxima of n(ω). nullopt signals an absent negative peak.
inline std::optional<PeakRatio> peak_ratio(const BathSpectrum& spec, double relative_floor = 1e-6) {
    const auto pos = find_peak(spec.omegas, spec.n_omega, true, 0.0);
    if (!pos) return std::nullopt;
    const auto neg = find_peak(spec.omegas, spec.n_omega, false, std::max(1e-12, relative_floor * pos->value));
    if (!neg) return std::nullopt;
    return PeakRatio{pos->omega, neg->omega, pos->value, neg->value, (pos->value + 1.0) / neg->value};
}

struct DetailedBalanceFit {
    double epsilon;     // slope of log(ratio) = ε β through the origin
    double r_squared;   // 1 - SS_res/SS_tot of that model
};

inline DetailedBalanceFit fit_detailed_balance(const std::vector<double>& betas, const std::vector<double>& ratios) {
    if (betas.size() != ratios.size() || betas.empty())
        throw InvalidInput("fit_detailed_balance: need matching, non-empty series");
    double sxy = 0.0, sxx = 0.0, mean = 0.0;
    std::vector<double> y(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!(ratios[i] > 0.0)) throw InvalidInput("fit_detailed_balance: ratios must be positive");
        y[i] = std::log(ratios[i]);
        sxy += betas[i] * y[i];
        sxx += betas[i] * betas[i];
        mean += y[i];
    }
    mean /= static_cast<double>(y.size());
    const double eps = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += std::pow(y[i] - eps * betas[i], 2);
        ss_tot += std::pow(y[i] - mean, 2);
    }
    return {eps, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

// First time t such that |d⟨σ_z⟩/dt| < threshold throughout [t, t + window]; nullopt if never.
inline std::optional<double> decay_time(const std::vector<double>& t, const std::vector<double>& sz,
                                        double window = 5.0, double threshold = 1e-4) {
    if (t.size() != sz.size() || t.size() < 3) return std::nullopt;
    std::vector<double> rate(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) rate[i] = std::abs((sz[i + 1] - sz[i]) / (t[i + 1] - t[i]));
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        bool ok = true;
        std::size_t j = i;
        for (; j + 1 < t.size() && t[j] <= t[i] + window; ++j)
            if (rate[j] >= threshold) { ok = false; break; }
        if (ok && t[j] >= t[i] + window) return t[i];
    }
    return std::nullopt;
}

// First time after which y stays within `band` of its mean over the second half of the series.
// Suited to noisy relaxation where the local derivative never settles.
inline std::optional<double> settling_time(const std::vector<double>& t, const std::vector<double>& y, double band) {
    if (t.size() != y.size() || t.size() < 2) return std::nullopt;
    const std::size_t half = t.size() / 2;
    double late = 0.0;
    for (std::size_t i = half; i < y.size(); ++i) late += y[i];
    late /= static_cast<double>(y.size() - half);
    std::size_t first = y.size();
    for (std::size_t i = y.size(); i-- > 0;) {
        if (std::abs(y[i] - late) > band) break;
        first = i;
    }
    if (first >= half) return std::nullopt;
    return t[first];
}

struct ConservationReport {
    double max_norm_error;     // max_t |‖ψ(t)‖ - 1|
    double max_energy_drift;   // max_t |E(t) - E(0)| / max(1, |E(0)|), energies in units of ω_c
};

inline ConservationReport conservation(const std::vector<double>& norm, const std::vector<double>& energy) {
    if (norm.empty() || energy.size() != norm.size()) throw InvalidInput("conservation: need matching, non-empty series");
    ConservationReport r{0.0, 0.0};
    const double scale = std::max(1.0, std::abs(energy.front()));
    for (std::size_t i = 0; i < norm.size(); ++i) {
        r.max_norm_error = std::max(r.max_norm_error, std::abs(norm[i] - 1.0));
        r.max_energy_drift = std::max(r.max_energy_drift, std::abs(energy[i] - energy.front()) / scale);
    }
    return r;
}

} // namespace ttedopa
