// krylov.hpp: Lanczos approximation of exp(-i H dt) v

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "ttedopa/errors.hpp"
#include "ttedopa/tensor/site_tensor.hpp"

namespace ttedopa {

struct KrylovOptions {
    int max_dim{30};
    double tolerance{1e-12};
};

struct KrylovStats {
    int dim{0};
    double residual{0.0};
};

// H must act as a Hermitian map on vectors of v's size. No restarts: failing to reach the tolerance
// within max_dim throws NumericalFailure with the achieved residual estimate.
template <class Apply>
cvec krylov_apply_exp(Apply&& apply_h, const cvec& v, std::complex<double> dt, const KrylovOptions& opt = {},
                      KrylovStats* stats = nullptr) {
    const double beta0 = v.norm();
    if (!(beta0 > 0.0)) throw InvalidInput("krylov_apply_exp: zero start vector");
    const std::complex<double> mi(0.0, -1.0);

    std::vector<cvec> basis;
    basis.reserve(static_cast<std::size_t>(opt.max_dim));
    basis.push_back(v / beta0);
    std::vector<double> diag, off;
    const Index n = v.size();

    double residual = 0.0;
    for (int j = 0; j < opt.max_dim; ++j) {
        cvec w = apply_h(basis.back());
        const double a = basis.back().dot(w).real();
        diag.push_back(a);
        w -= a * basis.back();
        if (j > 0) w -= off.back() * basis[basis.size() - 2];
        for (const auto& q : basis) w -= q.dot(w) * q;   // full reorthogonalization
        const double b = w.norm();

        const auto m = static_cast<Index>(diag.size());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        Eigen::VectorXd dvec = Eigen::Map<Eigen::VectorXd>(diag.data(), m);
        Eigen::VectorXd ovec = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(off.data(), m - 1))
                                     : Eigen::VectorXd();
        es.computeFromTridiagonal(dvec, ovec, Eigen::ComputeEigenvectors);
        const Eigen::MatrixXd& u = es.eigenvectors();
        cvec phase(m);
        for (Index k = 0; k < m; ++k) phase(k) = std::exp(mi * dt * es.eigenvalues()(k)) * u(0, k);
        const cvec y = u.cast<std::complex<double>>() * phase;

        const bool breakdown = b <= 1e-14 * std::max(1.0, std::abs(a)) || m == n;
        residual = breakdown ? 0.0 : b * std::abs(y(m - 1));
        if (breakdown || residual <= opt.tolerance) {
            cvec out = cvec::Zero(n);
            for (Index k = 0; k < m; ++k) out += y(k) * basis[static_cast<std::size_t>(k)];
            if (stats) *stats = {static_cast<int>(m), residual};
            return beta0 * out;
        }
        off.push_back(b);
        basis.push_back(w / b);
    }
    throw NumericalFailure("krylov_apply_exp: no convergence within " + std::to_string(opt.max_dim) + " vectors",
                           residual);
}

} // namespace ttedopa
