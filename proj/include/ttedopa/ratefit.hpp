// ratefit.hpp: Exponential rate extraction from ⟨σ_x(t)⟩ relaxation

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ttedopa/errors.hpp"

namespace ttedopa {

struct LinearFit {
    double slope;
    double intercept;
    double rmse;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidInput("linear_fit: need at least two matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidInput("linear_fit: abscissae are all equal");
    LinearFit f{sxy / sxx, 0.0, 0.0};
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
    f.rmse = std::sqrt(ss / static_cast<double>(n));
    return f;
}

struct RateFit {
    double gamma;
    double rmse;          // in log space
    std::size_t points;
};

inline constexpr double kDefaultTransient = 1.0;   // τ ≈ 1/ω_c

// Least squares of log(-⟨σ_x⟩) against t on t > tau; Γ = -slope.
inline RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& sigma_x,
                        double tau = kDefaultTransient) {
    if (times.size() != sigma_x.size()) throw InvalidInput("fit_rate: series lengths differ");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > tau)) continue;
        if (!(sigma_x[i] < 0.0))
            throw InvalidInput("fit_rate: <sigma_x> = " + std::to_string(sigma_x[i]) + " >= 0 at t = " +
                               std::to_string(times[i]) + "; choose a larger tau or a shorter window");
        x.push_back(times[i]);
        y.push_back(std::log(-sigma_x[i]));
    }
    if (x.size() < 10) throw InvalidInput("fit_rate: need at least 10 samples beyond tau");
    const LinearFit f = linear_fit(x, y);
    return {-f.slope, f.rmse, x.size()};
}

} // namespace ttedopa
