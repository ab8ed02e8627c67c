// chainmap.hpp: Orthogonal-polynomial map from the extended star bath to a nearest-neighbour chain

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ttedopa/errors.hpp"
#include "ttedopa/quadrature.hpp"
#include "ttedopa/spectral.hpp"

namespace ttedopa {

// Monic three-term recurrence π_{k+1} = (x - α_k) π_k - β_k π_{k-1}, with β_0 := ∫dμ.
struct RecurrenceCoefficients {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::size_t nodes{0};       // quadrature nodes used for the discretized measure

    std::size_t size() const noexcept { return alpha.size(); }
};

// Chain Hamiltonian  κ A_S (c_1 + c_1†) + Σ ω_n c_n†c_n + Σ t_n (c_n†c_{n+1} + h.c.).
// Stored 0-based: omega[j] is the on-site energy of chain site j+1, t[j] couples sites j+1 and j+2.
struct ChainCoefficients {
    double kappa{0.0};
    std::vector<double> omega;
    std::vector<double> t;
    double beta{kInfiniteBeta};
    std::string source_hash;

    std::size_t size() const noexcept { return omega.size(); }
};

inline std::size_t default_stieltjes_nodes(std::size_t n) { return std::max<std::size_t>(2000, 8 * n); }

// Discretized measure J_β(ω)dω: Gauss–Legendre on [-ω_c, 0] ∪ [0, ω_c], nodes/2 per panel.
// No node sits at ω = 0.
inline quad::Rule discretize_measure(const ThermalizedSpectralDensity& Jb, std::size_t nodes) {
    const double wc = Jb.base.cutoff();
    quad::Rule r = quad::composite({-wc, 0.0, wc}, std::max<std::size_t>(1, nodes / 2));
    for (std::size_t i = 0; i < r.size(); ++i) r.weights[i] *= Jb(r.nodes[i]);
    return r;
}

// Discretized Stieltjes procedure on q_k = √w p̃_k, the weighted orthonormal polynomial values at the nodes.
// Each q_k is a unit vector, so nodes of zero weight (ω < 0 at β = ∞) stay at zero instead of overflowing.
inline RecurrenceCoefficients stieltjes_recurrence(const ThermalizedSpectralDensity& Jb, std::size_t n,
                                                   std::size_t nodes = 0) {
    if (n < 1) throw InvalidInput("stieltjes_recurrence: N must be at least 1");
    if (nodes == 0) nodes = default_stieltjes_nodes(n);
    if (nodes < 4 * n) throw InvalidInput("stieltjes_recurrence: need nodes >= 4*N");

    const quad::Rule mu = discretize_measure(Jb, nodes);
    const Eigen::Map<const Eigen::ArrayXd> x(mu.nodes.data(), static_cast<Eigen::Index>(mu.size()));
    const Eigen::Map<const Eigen::ArrayXd> w(mu.weights.data(), static_cast<Eigen::Index>(mu.size()));

    RecurrenceCoefficients rc;
    rc.nodes = nodes;
    rc.alpha.reserve(n);
    rc.beta.reserve(n);

    const double mass = w.sum();
    const double floor = std::pow(1e-10 * x.abs().maxCoeff(), 2);
    if (!(mass > 0.0)) throw NumericalFailure("stieltjes_recurrence: beta_0 <= 0 at k=0", mass);
    rc.beta.push_back(mass);

    Eigen::ArrayXd prev = Eigen::ArrayXd::Zero(x.size());
    Eigen::ArrayXd cur = w.sqrt() / std::sqrt(mass);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = (x * cur.square()).sum();
        rc.alpha.push_back(a);
        if (k + 1 == n) break;
        Eigen::ArrayXd next = (x - a) * cur;
        if (k > 0) next -= std::sqrt(rc.beta[k]) * prev;
        const double b = next.square().sum();
        if (!(b > floor) || !std::isfinite(b))
            throw NumericalFailure("stieltjes_recurrence: beta_k <= 0 at k=" + std::to_string(k + 1), b);
        rc.beta.push_back(b);
        prev = std::move(cur);
        cur = next / std::sqrt(b);
    }
    return rc;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

// Digest of everything that determines the chain: spectral density, β, length and discretization.
inline std::string chain_source_hash(const SpectralDensity& J, double beta, std::size_t n, std::size_t nodes) {
    std::string key;
    if (J.kind == SpectralKind::OhmicHardCutoff) {
        key = "ohmic;alpha=" + detail::fmt17(J.alpha) + ";s=" + detail::fmt17(J.s) + ";wc=" + detail::fmt17(J.omega_c);
    } else {
        key = "table";
        for (const auto& [w, j] : J.table) key += ";" + detail::fmt17(w) + ":" + detail::fmt17(j);
    }
    key += ";beta=" + detail::fmt17(beta) + ";N=" + std::to_string(n) + ";nodes=" + std::to_string(nodes);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(key)));
    return buf;
}

// κ = √β_0, ω_{n+1} = α_n, t_n = √β_n (chain sites labelled from 1).
inline ChainCoefficients chain_coefficients(const RecurrenceCoefficients& rc) {
    if (rc.alpha.empty() || rc.beta.size() != rc.alpha.size())
        throw InvalidInput("chain_coefficients: malformed recurrence coefficients");
    for (std::size_t k = 0; k < rc.beta.size(); ++k)
        if (!(rc.beta[k] > 0.0)) throw InvalidInput("chain_coefficients: beta_k <= 0 at k=" + std::to_string(k));
    ChainCoefficients cc;
    cc.kappa = std::sqrt(rc.beta[0]);
    cc.omega = rc.alpha;
    cc.t.reserve(rc.beta.size() - 1);
    for (std::size_t k = 1; k < rc.beta.size(); ++k) cc.t.push_back(std::sqrt(rc.beta[k]));
    return cc;
}

inline ChainCoefficients compute_chain(const SpectralDensity& J, double beta, std::size_t n, std::size_t nodes = 0) {
    if (nodes == 0) nodes = default_stieltjes_nodes(n);
    const auto Jb = thermalize(J, beta);
    ChainCoefficients cc = chain_coefficients(stieltjes_recurrence(Jb, n, nodes));
    cc.beta = beta;
    cc.source_hash = chain_source_hash(J, beta, n, nodes);
    return cc;
}

// U_n(ω) = √J_β(ω) p̃_n(ω) tabulated on a frequency grid.
struct TransformKernel {
    std::vector<double> grid;
    std::vector<double> weights;    // quadrature weights when the grid is a quadrature rule, else empty
    Eigen::MatrixXd poly;           // p̃_n(ω_g): rows n, columns g
    Eigen::MatrixXd values;         // U_n(ω_g)

    std::size_t sites() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

// Orthonormal forward recurrence
//   √β_{n+1} p̃_{n+1} = (ω - α_n) p̃_n - √β_n p̃_{n-1},  p̃_0 = 1/√β_0.
inline TransformKernel transform_kernel(const ThermalizedSpectralDensity& Jb, const RecurrenceCoefficients& rc,
                                        const std::vector<double>& grid, std::size_t sites = 0) {
    if (sites == 0) sites = rc.size();
    if (sites > rc.size()) throw InvalidInput("transform_kernel: more sites requested than recurrence coefficients");
    const double wc = Jb.base.cutoff();
    for (double w : grid)
        if (w < -wc || w > wc) throw InvalidInput("transform_kernel: grid point outside [-omega_c, omega_c]");

    TransformKernel k;
    k.grid = grid;
    const auto n = static_cast<Eigen::Index>(sites);
    const auto g = static_cast<Eigen::Index>(grid.size());
    k.poly.resize(n, g);
    k.values.resize(n, g);
    for (Eigen::Index j = 0; j < g; ++j) {
        const double w = grid[static_cast<std::size_t>(j)];
        double prev = 0.0, cur = 1.0 / std::sqrt(rc.beta[0]);
        for (Eigen::Index m = 0; m < n; ++m) {
            k.poly(m, j) = cur;
            if (m + 1 == n) break;
            const auto um = static_cast<std::size_t>(m);
            double next = (w - rc.alpha[um]) * cur - (m > 0 ? std::sqrt(rc.beta[um]) * prev : 0.0);
            next /= std::sqrt(rc.beta[um + 1]);
            prev = cur;
            cur = next;
        }
        const double jb = Jb(w);
        // p̃_n grows geometrically off the support; U_n is zero there regardless.
        if (!(jb > 0.0)) k.values.col(j).setZero();
        else k.values.col(j) = std::sqrt(jb) * k.poly.col(j);
    }
    return k;
}

// Kernel on the two-panel Gauss–Legendre grid over [-ω_c, ω_c]; the weights make Σ_g w_g U_n U_m = δ_nm.
inline TransformKernel transform_kernel_quadrature(const ThermalizedSpectralDensity& Jb, const RecurrenceCoefficients& rc,
                                                   std::size_t nodes, std::size_t sites = 0) {
    const double wc = Jb.base.cutoff();
    const quad::Rule r = quad::composite({-wc, 0.0, wc}, std::max<std::size_t>(1, nodes / 2));
    TransformKernel k = transform_kernel(Jb, rc, r.nodes, sites);
    k.weights = r.weights;
    return k;
}

} // namespace ttedopa
