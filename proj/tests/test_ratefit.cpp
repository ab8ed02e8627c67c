#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ttedopa/ratefit.hpp"

using namespace ttedopa;

namespace {

void decay(double gamma, double amplitude, std::vector<double>& t, std::vector<double>& sx, int n = 400, double dt = 0.05) {
    t.clear();
    sx.clear();
    for (int i = 0; i <= n; ++i) {
        t.push_back(dt * i);
        sx.push_back(-amplitude * std::exp(-gamma * t.back()));
    }
}

} // namespace

TEST(FitRate, ExactExponential) {
    std::vector<double> t, sx;
    decay(0.037, 1.0, t, sx);
    const auto f = fit_rate(t, sx, 1.0);
    EXPECT_NEAR(f.gamma, 0.037, 1e-10);
    EXPECT_LT(f.rmse, 1e-12);
    EXPECT_EQ(f.points, 380u);
}

TEST(FitRate, AmplitudeAndWindowInvariance) {
    std::vector<double> t, sx;
    decay(0.11, 0.6, t, sx);
    EXPECT_NEAR(fit_rate(t, sx, 1.0).gamma, 0.11, 1e-10);
    EXPECT_NEAR(fit_rate(t, sx, 7.5).gamma, 0.11, 1e-10);
}

TEST(FitRate, TransientIsExcluded) {
    std::vector<double> t, sx;
    decay(0.05, 1.0, t, sx);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] <= 1.0) sx[i] = 0.3 * std::sin(7.0 * t[i]);   // spike, partly positive
    EXPECT_NEAR(fit_rate(t, sx, 1.0).gamma, 0.05, 1e-10);
}

TEST(FitRate, NoisyDataMonteCarlo) {
    std::mt19937 rng(2024);
    std::normal_distribution<double> noise(0.0, 1e-4);
    std::vector<double> t, sx;
    decay(0.02, 1.0, t, sx, 2000, 0.05);
    double mean = 0.0;
    const int trials = 50;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> y = sx;
        for (double& v : y) v *= 1.0 + noise(rng);
        mean += fit_rate(t, y, 1.0).gamma;
    }
    EXPECT_NEAR(mean / trials, 0.02, 1e-5);
}

TEST(FitRate, Errors) {
    std::vector<double> t, sx;
    decay(0.05, 1.0, t, sx);
    sx[100] = 0.01;
    try {
        fit_rate(t, sx, 1.0);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("larger tau"), std::string::npos);
    }
    EXPECT_NO_THROW(fit_rate(t, sx, 5.1));
    EXPECT_THROW(fit_rate(t, sx, 19.9), InvalidInput);
    EXPECT_THROW(fit_rate({1.0, 2.0}, {-1.0}, 0.0), InvalidInput);
}

TEST(LinearFit, Basics) {
    const auto f = linear_fit({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
    EXPECT_NEAR(f.slope, 2.0, 1e-15);
    EXPECT_NEAR(f.intercept, 1.0, 1e-15);
    EXPECT_THROW(linear_fit({1.0, 1.0}, {0.0, 1.0}), InvalidInput);
}
