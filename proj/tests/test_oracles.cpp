#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ttedopa/oracles.hpp"
#include "support/reference.hpp"

using namespace ttedopa;
using namespace ttedopa::oracles;

using reference::brute_force_coherence;

TEST(IbmOracle, PrefactorAgainstBruteForce) {
    // 10 modes, midpoint discretization of J(ω) = 2αω on [0, 1].
    const double alpha = 0.1, omega_0 = 0.2;
    std::vector<double> w, g;
    for (int k = 0; k < 10; ++k) {
        w.push_back((k + 0.5) / 10.0);
        g.push_back(std::sqrt(2.0 * alpha * w.back() * 0.1));
    }
    for (double beta : {kInfiniteBeta, 100.0, 10.0}) {
        double worst = 0.0;
        for (double t : {0.5, 2.0, 5.0, 10.0, 20.0, 40.0}) {
            const double exact = brute_force_coherence(w, g, beta, omega_0, t, 40);
            const double formula = std::cos(omega_0 * t) * std::exp(-ibm_decoherence_discrete(w, g, beta, t));
            worst = std::max(worst, std::abs(exact - formula));
        }
        EXPECT_LT(worst, 1e-4) << beta;
    }
    // A wrong prefactor is clearly rejected.
    const double t = 10.0;
    const double exact = brute_force_coherence(w, g, 100.0, omega_0, t, 40);
    const double half = std::cos(omega_0 * t) * std::exp(-0.5 * ibm_decoherence_discrete(w, g, 100.0, t));
    EXPECT_GT(std::abs(exact - half), 1e-2);
}

TEST(IbmOracle, DiscreteSumConvergesToIntegral) {
    const auto J = SpectralDensity::ohmic(0.1);
    const int m = 20000;
    std::vector<double> w, g;
    for (int k = 0; k < m; ++k) {
        w.push_back((k + 0.5) / m);
        g.push_back(std::sqrt(J(w.back()) / m));
    }
    for (double beta : {1.0, 10.0, kInfiniteBeta})
        for (double t : {1.0, 7.0, 25.0})
            EXPECT_NEAR(ibm_decoherence(J, beta, t), ibm_decoherence_discrete(w, g, beta, t), 1e-6);
}

TEST(IbmOracle, StartsCoherent) {
    const auto J = SpectralDensity::ohmic(0.1);
    EXPECT_DOUBLE_EQ(ibm_coherence(J, 10.0, 0.2, 0.0), 1.0);
    EXPECT_THROW(ibm_decoherence(J, 0.0, 1.0), InvalidInput);
}

TEST(IbmOracle, EnvelopeNonIncreasing) {
    const auto J = SpectralDensity::ohmic(0.1);
    for (double beta : {1.0, 10.0, 100.0, kInfiniteBeta}) {
        double prev = 0.0;
        for (int i = 1; i <= 400; ++i) {
            const double g = ibm_decoherence(J, beta, 0.1 * i);
            EXPECT_GE(g, prev - 1e-12) << beta << " " << 0.1 * i;
            prev = g;
        }
    }
}

TEST(IbmOracle, HotterDephasesFaster) {
    const auto J = SpectralDensity::ohmic(0.1);
    const std::vector<double> betas{0.5, 1.0, 10.0, 100.0, kInfiniteBeta};
    for (double t : {0.5, 3.0, 12.0, 40.0})
        for (std::size_t i = 0; i + 1 < betas.size(); ++i)
            EXPECT_GE(ibm_decoherence(J, betas[i], t), ibm_decoherence(J, betas[i + 1], t) - 1e-12);
}

TEST(RenormalizedGap, Values) {
    EXPECT_NEAR(renormalized_gap(0.2, 0.1), 0.16725020619007471, 1e-12);
    EXPECT_DOUBLE_EQ(renormalized_gap(0.2, 0.0), 0.2);
    EXPECT_THROW(renormalized_gap(0.2, 1.0), InvalidInput);
    EXPECT_THROW(renormalized_gap(0.2, -0.1), InvalidInput);
    EXPECT_LT(renormalized_gap(0.2, 0.3), renormalized_gap(0.2, 0.1));
}

TEST(GoldenRule, PinnedValues) {
    // mpmath evaluations of the two limiting expressions.
    EXPECT_NEAR(golden_rule_rate({0.2, 0.8, 100.0, 1.0}, Regime::LowT), 2.484962655561557e-3, 1e-15);
    EXPECT_NEAR(golden_rule_rate({0.2, 0.8, 0.5, 1.0}, Regime::HighT), 8.11224485765873e-3, 1e-15);
}

TEST(GoldenRule, Scaling) {
    for (auto regime : {Regime::LowT, Regime::HighT})
        for (double beta : {0.3, 2.0, 50.0}) {
            const double r1 = golden_rule_rate({0.2, 0.8, beta, 1.0}, regime);
            const double r2 = golden_rule_rate({0.4, 0.8, beta, 1.0}, regime);
            EXPECT_NEAR(r2 / r1, 4.0, 1e-12);
        }
    const double a = golden_rule_rate({0.2, 0.5, 5.0, 1.0}, Regime::LowT);
    for (double beta : {10.0, 100.0, 1000.0})
        EXPECT_NEAR(golden_rule_rate({0.2, 0.5, beta, 1.0}, Regime::LowT), a, 1e-15);
    const double h1 = golden_rule_rate({0.2, 0.8, 1e-6, 1.0}, Regime::HighT);
    const double h2 = golden_rule_rate({0.2, 0.8, 4e-6, 1.0}, Regime::HighT);
    EXPECT_NEAR(h2 / h1, 2.0, 1e-5);
    EXPECT_TRUE((GoldenRuleParams{0.2, 0.8, 1.0, 1.0}.non_adiabatic()));
    EXPECT_FALSE((GoldenRuleParams{0.9, 0.8, 1.0, 1.0}.non_adiabatic()));
}
