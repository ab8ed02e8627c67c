#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ttedopa/chain_cache.hpp"
#include "ttedopa/chainmap.hpp"

using namespace ttedopa;

namespace {

// Monic Jacobi recurrence for weight (1-x)^a (1+x)^b on [-1, 1], mapped to ω = (x+1)/2.
// Test-only oracle for the zero-temperature Ohmic (s=1) measure 2αω on [0, 1], i.e. a=0, b=1.
std::pair<double, double> jacobi_on_unit_interval(int n, double a, double b) {
    const double s = 2.0 * n + a + b;
    double alpha_x = (b * b - a * a) / (s * (s + 2.0));
    if (n == 0) alpha_x = (b - a) / (a + b + 2.0);
    double beta_x = 0.0;
    if (n >= 1) {
        beta_x = 4.0 * n * (n + a) * (n + b) * (n + a + b) / (s * s * (s + 1.0) * (s - 1.0));
        if (n == 1 && a + b == -1.0) beta_x = 0.0;
    }
    return {0.5 * (alpha_x + 1.0), 0.25 * beta_x};
}

double jb_mass(const ThermalizedSpectralDensity& Jb) {
    quad::AdaptiveOptions opt;
    opt.tolerance = 1e-13;
    return quad::integrate(Jb, Jb.lower(), 0.0, opt) + quad::integrate(Jb, 0.0, Jb.upper(), opt);
}

} // namespace

TEST(Stieltjes, SingleCoefficientIsMomentRatio) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.1), kInfiniteBeta);
    const auto rc = stieltjes_recurrence(Jb, 1);
    ASSERT_EQ(rc.size(), 1u);
    EXPECT_NEAR(rc.beta[0], 0.1, 1e-13);          // ∫_0^1 0.2 ω dω
    EXPECT_NEAR(rc.alpha[0], 2.0 / 3.0, 1e-13);   // (0.2/3)/0.1
    EXPECT_NEAR(chain_coefficients(rc).kappa, 0.31622776601683794, 1e-13);

    const auto Jt = thermalize(SpectralDensity::ohmic(0.1), 1.0);
    const auto r1 = stieltjes_recurrence(Jt, 1);
    quad::AdaptiveOptions opt;
    opt.tolerance = 1e-13;
    const double m0 = jb_mass(Jt);
    const double m1 = quad::integrate([&](double w) { return w * Jt(w); }, -1.0, 0.0, opt) +
                      quad::integrate([&](double w) { return w * Jt(w); }, 0.0, 1.0, opt);
    EXPECT_NEAR(r1.beta[0], m0, 1e-12);
    EXPECT_NEAR(r1.alpha[0], m1 / m0, 1e-12);
}

TEST(Stieltjes, ZeroTemperatureMatchesJacobiOracle) {
    const auto rc = stieltjes_recurrence(thermalize(SpectralDensity::ohmic(0.1), kInfiniteBeta), 120);
    for (int n = 0; n < 120; ++n) {
        const auto [a, b] = jacobi_on_unit_interval(n, 0.0, 1.0);
        EXPECT_NEAR(rc.alpha[static_cast<std::size_t>(n)], a, 1e-12) << n;
        if (n >= 1) EXPECT_NEAR(rc.beta[static_cast<std::size_t>(n)], b, 1e-12) << n;
    }
}

TEST(Stieltjes, LongZeroTemperatureChainStaysFinite) {
    const std::size_t n = 400;
    const auto rc = stieltjes_recurrence(thermalize(SpectralDensity::ohmic(0.1), kInfiniteBeta), n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto [a, b] = jacobi_on_unit_interval(static_cast<int>(k), 0.0, 1.0);
        EXPECT_NEAR(rc.alpha[k], a, 1e-12) << k;
        if (k >= 1) EXPECT_NEAR(rc.beta[k], b, 1e-12) << k;
    }
}

TEST(Stieltjes, PreconditionsAndFailures) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.1), 1.0);
    EXPECT_THROW(stieltjes_recurrence(Jb, 0), InvalidInput);
    EXPECT_THROW(stieltjes_recurrence(Jb, 10, 39), InvalidInput);

    // Only one quadrature node carries weight: the discrete measure has a single support point.
    const auto spike = thermalize(SpectralDensity::tabulated({{0.0, 0.0}, {0.9, 0.0}, {1.0, 1.0}}), kInfiniteBeta);
    try {
        stieltjes_recurrence(spike, 2, 8);
        FAIL() << "expected NumericalFailure";
    } catch (const NumericalFailure& e) {
        EXPECT_NE(std::string(e.what()).find("k=1"), std::string::npos) << e.what();
    }
}

TEST(Stieltjes, FiniteTemperatureAsymptotics) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.1), 2.0);
    const auto cc = chain_coefficients(stieltjes_recurrence(Jb, 200));
    const auto ref = chain_coefficients(stieltjes_recurrence(Jb, 200, 4 * default_stieltjes_nodes(200)));
    for (std::size_t n = 150; n < 200; ++n) {
        EXPECT_NEAR(cc.omega[n], 0.0, 1e-3);
        EXPECT_NEAR(cc.omega[n], ref.omega[n], 1e-10);
    }
    for (std::size_t n = 149; n < 199; ++n) {
        EXPECT_NEAR(cc.t[n], 0.5, 1e-3);
        EXPECT_NEAR(cc.t[n], ref.t[n], 1e-10);
    }
}

TEST(Stieltjes, NodeDoublingStability) {
    for (double beta : {1.0, 10.0, kInfiniteBeta}) {
        const auto Jb = thermalize(SpectralDensity::ohmic(0.1), beta);
        const auto a = stieltjes_recurrence(Jb, 150);
        const auto b = stieltjes_recurrence(Jb, 150, 2 * a.nodes);
        for (std::size_t k = 0; k < 150; ++k) {
            EXPECT_NEAR(a.alpha[k], b.alpha[k], 1e-10 * std::max(1.0, std::abs(b.alpha[k])));
            EXPECT_NEAR(a.beta[k], b.beta[k], 1e-10 * std::max(1.0, b.beta[k]));
        }
    }
}

TEST(Stieltjes, StrongCouplingHoppingsBounded) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.8), 1.0);
    const auto cc = chain_coefficients(stieltjes_recurrence(Jb, 300));
    const auto ref = chain_coefficients(stieltjes_recurrence(Jb, 300, 4 * default_stieltjes_nodes(300)));
    // Support [-1, 1] bounds √β_n by the half-width 1; the first hoppings sit above the limit 1/2.
    for (std::size_t n = 0; n < cc.t.size(); ++n) {
        EXPECT_GT(cc.t[n], 0.0);
        EXPECT_LE(cc.t[n], 1.0);
        EXPECT_NEAR(cc.t[n], ref.t[n], 1e-10);
    }
    // Lanczos on diag(ω) with a 4000-point Gauss-Legendre grid (numpy).
    EXPECT_NEAR(cc.t[0], 0.5604738355374657, 1e-9);
    EXPECT_NEAR(cc.t[1], 0.5187771125535131, 1e-9);
    EXPECT_NEAR(cc.t[7], 0.5009877131032219, 1e-9);
    for (std::size_t n = 0; n + 1 < cc.t.size(); ++n) EXPECT_GT(cc.t[n], 0.5);
    EXPECT_NEAR(cc.t.back(), 0.5, 1e-4);
}

TEST(Stieltjes, JacobiMatrixSpectralContainment) {
    for (double beta : {0.5, 3.0, kInfiniteBeta}) {
        const auto rc = stieltjes_recurrence(thermalize(SpectralDensity::ohmic(0.1), beta), 100);
        Eigen::VectorXd d(100), e(99);
        for (int k = 0; k < 100; ++k) d(k) = rc.alpha[static_cast<std::size_t>(k)];
        for (int k = 1; k < 100; ++k) e(k - 1) = std::sqrt(rc.beta[static_cast<std::size_t>(k)]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
        const double lo = std::isinf(beta) ? 0.0 : -1.0;
        EXPECT_GE(es.eigenvalues().minCoeff(), lo);
        EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0);
        for (double a : rc.alpha) {
            EXPECT_GE(a, lo);
            EXPECT_LE(a, 1.0);
        }
    }
}

TEST(Stieltjes, TemperatureContinuity) {
    const auto cold = stieltjes_recurrence(thermalize(SpectralDensity::ohmic(0.1), 1e6), 50);
    const auto zero = stieltjes_recurrence(thermalize(SpectralDensity::ohmic(0.1), kInfiniteBeta), 50);
    for (std::size_t k = 0; k < 50; ++k) {
        EXPECT_NEAR(cold.alpha[k], zero.alpha[k], 1e-6);
        EXPECT_NEAR(cold.beta[k], zero.beta[k], 1e-6);
    }
}

TEST(ChainCoefficients, Relabel) {
    RecurrenceCoefficients rc;
    rc.alpha = {0.5};
    rc.beta = {0.1};
    const auto cc = chain_coefficients(rc);
    EXPECT_NEAR(cc.kappa, 0.31622776601683794, 1e-15);
    EXPECT_EQ(cc.omega, std::vector<double>{0.5});
    EXPECT_TRUE(cc.t.empty());

    rc.alpha = {0.1, 0.2, 0.3};
    rc.beta = {4.0, 0.25, 0.09};
    const auto c3 = chain_coefficients(rc);
    EXPECT_DOUBLE_EQ(c3.kappa, 2.0);
    ASSERT_EQ(c3.t.size(), 2u);
    EXPECT_DOUBLE_EQ(c3.t[0], 0.5);
    EXPECT_DOUBLE_EQ(c3.t[1], 0.3);

    rc.beta = {4.0, -0.25, 0.09};
    EXPECT_THROW(chain_coefficients(rc), InvalidInput);
}

TEST(ChainCoefficients, KappaSquaredIsTotalWeight) {
    for (double beta : {0.1, 1.0, 10.0, kInfiniteBeta}) {
        const auto Jb = thermalize(SpectralDensity::ohmic(0.1), beta);
        const auto cc = chain_coefficients(stieltjes_recurrence(Jb, 20));
        EXPECT_NEAR(cc.kappa * cc.kappa, jb_mass(Jb), 1e-10) << beta;
    }
}

TEST(TransformKernel, ZerothPolynomialIsInverseKappa) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.1), 3.0);
    const auto rc = stieltjes_recurrence(Jb, 10);
    const auto k = transform_kernel(Jb, rc, {-0.9, -0.2, 0.0, 0.4, 1.0});
    for (Eigen::Index g = 0; g < 5; ++g) EXPECT_NEAR(k.poly(0, g), 1.0 / std::sqrt(rc.beta[0]), 1e-15);
    EXPECT_THROW(transform_kernel(Jb, rc, {1.2}), InvalidInput);
    EXPECT_THROW(transform_kernel(Jb, rc, {0.1}, 11), InvalidInput);
}

TEST(TransformKernel, DiscreteOrthonormality) {
    for (double beta : {1.0, kInfiniteBeta}) {
        const auto Jb = thermalize(SpectralDensity::ohmic(0.1), beta);
        const auto rc = stieltjes_recurrence(Jb, 50);
        const auto k = transform_kernel_quadrature(Jb, rc, 2000);
        Eigen::MatrixXd w = Eigen::Map<const Eigen::VectorXd>(k.weights.data(), static_cast<Eigen::Index>(k.weights.size())).asDiagonal();
        const Eigen::MatrixXd gram = k.values * w * k.values.transpose();
        EXPECT_LT((gram - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(TransformKernel, CompletenessConcentrates) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.1), 2.0);
    const auto rc = stieltjes_recurrence(Jb, 200);
    std::vector<double> grid{0.2};
    for (int i = 0; i <= 50; ++i) grid.push_back(0.4 + 0.01 * i);
    auto mean_offdiag = [&](std::size_t n) {
        const auto k = transform_kernel(Jb, rc, grid, n);
        const Eigen::MatrixXd g = k.values.transpose() * k.values;
        double s = 0.0;
        for (Eigen::Index j = 1; j < g.rows(); ++j) s += std::abs(g(0, j)) / std::sqrt(g(0, 0) * g(j, j));
        return s / static_cast<double>(g.rows() - 1);
    };
    const double c25 = mean_offdiag(25), c50 = mean_offdiag(50), c200 = mean_offdiag(200);
    EXPECT_LT(c50, c25);
    EXPECT_LT(c200, c50);
    EXPECT_LT(c200, 0.5 * c25);
}

TEST(ChainCache, StoresAndHitsByHash) {
    const auto dir = std::filesystem::temp_directory_path() / "ttedopa_cache_test";
    std::filesystem::remove_all(dir);
    ChainCache cache(dir);
    ChainRequest req{SpectralDensity::ohmic(0.1), kInfiniteBeta, 30, 0, 1e-10};
    auto [first, hit1] = cache.get(req);
    EXPECT_FALSE(hit1);
    auto [second, hit2] = cache.get(req);
    EXPECT_TRUE(hit2);
    EXPECT_EQ(first.source_hash, second.source_hash);
    EXPECT_EQ(first.kappa, second.kappa);
    EXPECT_EQ(first.omega, second.omega);
    EXPECT_EQ(first.t, second.t);
    EXPECT_TRUE(std::isinf(second.beta));

    std::ifstream js(cache.json_path(req.hash()));
    const auto meta = nlohmann::json::parse(js);
    for (const char* key : {"alpha", "s", "omega_c", "beta", "kappa", "N", "nodes", "tolerance"})
        EXPECT_TRUE(meta.contains(key)) << key;
    std::ifstream csv(cache.csv_path(req.hash()));
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "n,omega,t");

    ChainRequest other = req;
    other.beta = 2.0;
    EXPECT_NE(other.hash(), req.hash());
    std::filesystem::remove_all(dir);
}
