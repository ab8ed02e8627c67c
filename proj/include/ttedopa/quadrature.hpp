// quadrature.hpp: Gauss–Legendre rules and adaptive panel integration

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ttedopa/errors.hpp"

namespace ttedopa::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

// n-point Gauss–Legendre rule on [-1, 1], nodes ascending.
// Newton iteration on P_n from the Tricomi initial guess; accurate to a few ulp for n up to ~10^4.
inline Rule gauss_legendre(std::size_t n) {
    if (n == 0) throw InvalidInput("gauss_legendre: n must be positive");
    Rule r;
    r.nodes.assign(n, 0.0);
    r.weights.assign(n, 0.0);
    const double dn = static_cast<double>(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double dk = static_cast<double>(k);
            const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) { p0 = 1.0; p1 = x; }
        dp = dn * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[n - 1 - i] = x;
        r.nodes[i] = -x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

// Affine map of a [-1, 1] rule onto [a, b].
inline Rule mapped(const Rule& ref, double a, double b) {
    Rule r;
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    r.nodes.reserve(ref.size());
    r.weights.reserve(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        r.nodes.push_back(mid + half * ref.nodes[i]);
        r.weights.push_back(half * ref.weights[i]);
    }
    return r;
}

// Concatenation of rules on adjacent panels.
inline Rule composite(const std::vector<double>& breaks, std::size_t nodes_per_panel) {
    const Rule ref = gauss_legendre(nodes_per_panel);
    Rule out;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const Rule r = mapped(ref, breaks[p], breaks[p + 1]);
        out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
        out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
    return out;
}

struct AdaptiveOptions {
    double tolerance{1e-10};
    std::size_t order{20};     // low rule; the error estimate uses 2*order
    int max_depth{40};
};

namespace detail {

template <class T, class F>
T apply_rule(const Rule& ref, F& f, double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    T acc{};
    for (std::size_t i = 0; i < ref.size(); ++i) acc += ref.weights[i] * f(mid + half * ref.nodes[i]);
    return acc * half;
}

template <class T, class F>
T adapt(const Rule& lo, const Rule& hi, F& f, double a, double b, double tol, int depth, int max_depth,
        double& worst) {
    const T coarse = apply_rule<T>(lo, f, a, b);
    const T fine = apply_rule<T>(hi, f, a, b);
    const double err = std::abs(fine - coarse);
    if (err <= tol) return fine;
    if (depth >= max_depth) {
        worst = std::max(worst, err);
        return fine;
    }
    const double m = 0.5 * (a + b);
    return adapt<T>(lo, hi, f, a, m, 0.5 * tol, depth + 1, max_depth, worst) +
           adapt<T>(lo, hi, f, m, b, 0.5 * tol, depth + 1, max_depth, worst);
}

} // namespace detail

// Adaptive Gauss–Legendre integration of a real or complex valued f over [a, b].
// Panels are bisected until the order/2*order rules agree to the panel's share of the tolerance.
template <class T = double, class F>
T integrate(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
    if (!(b > a)) return T{};
    const Rule lo = gauss_legendre(opt.order);
    const Rule hi = gauss_legendre(2 * opt.order);
    double worst = 0.0;
    T result = detail::adapt<T>(lo, hi, f, a, b, opt.tolerance, 0, opt.max_depth, worst);
    if (worst > 0.0) throw NumericalFailure("adaptive quadrature did not converge", worst);
    return result;
}

} // namespace ttedopa::quad
