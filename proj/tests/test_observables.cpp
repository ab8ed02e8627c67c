#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ttedopa/observables.hpp"

using namespace ttedopa;

namespace {

MpsState random_mps(const std::vector<Index>& dims, Index max_bond, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    const auto caps = bond_caps(dims, max_bond);
    MpsState psi;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        SiteTensor t(i == 0 ? 1 : caps[i - 1], dims[i], i + 1 == dims.size() ? 1 : caps[i]);
        for (auto& s : t.slices)
            for (Index r = 0; r < s.rows(); ++r)
                for (Index c = 0; c < s.cols(); ++c) s(r, c) = {g(rng), g(rng)};
        psi.sites.push_back(std::move(t));
    }
    return orthogonalize(std::move(psi), 0);
}

cmat embed(const std::vector<Index>& dims, std::size_t site, const cmat& op) {
    cmat out = cmat::Ones(1, 1);
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const cmat f = i == site ? op : cmat(cmat::Identity(dims[i], dims[i]));
        cmat k(out.rows() * f.rows(), out.cols() * f.cols());
        for (Index a = 0; a < out.rows(); ++a)
            for (Index b = 0; b < out.cols(); ++b) k.block(a * f.rows(), b * f.cols(), f.rows(), f.cols()) = out(a, b) * f;
        out = std::move(k);
    }
    return out;
}

} // namespace

TEST(MeasureLocal, Basics) {
    const auto vac = product_state({Eigen::Vector2cd(1, 0), basis_vector(4, 0), basis_vector(4, 0)}, 4);
    EXPECT_NEAR(measure_local(vac, ladder::number(4), 1).real(), 0.0, 1e-15);
    EXPECT_NEAR(measure_local(vac, ladder::number(4), 2).real(), 0.0, 1e-15);
    EXPECT_NEAR(measure_local(vac, pauli::z(), 0).real(), 1.0, 1e-15);
    EXPECT_THROW(measure_local(vac, ladder::number(3), 1), InvalidInput);
    EXPECT_THROW(measure_local(vac, pauli::z(), 3), InvalidInput);

    const auto psi = random_mps({2, 3, 3, 3}, 4, 17);
    for (std::size_t i = 0; i < psi.size(); ++i)
        EXPECT_NEAR(std::abs(measure_local(psi, cmat::Identity(psi.sites[i].d(), psi.sites[i].d()), i) - 1.0), 0.0, 1e-12);
}

TEST(MeasureLocal, MatchesDense) {
    const std::vector<Index> dims{2, 3, 3, 3};
    auto psi = random_mps(dims, 3, 5);
    psi = orthogonalize(std::move(psi), 2);
    const cvec v = to_dense(psi);
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const cmat op = i == 0 ? cmat(pauli::y()) : cmat(ladder::creation(3) + 0.3 * ladder::number(3));
        const auto ref = v.dot(embed(dims, i, op) * v) / v.squaredNorm();
        EXPECT_LT(std::abs(measure_local(psi, op, i) - ref), 1e-12);
    }
}

TEST(ChainCorrelation, VacuumAndSingleExcitation) {
    const auto vac = product_state({Eigen::Vector2cd(1, 0), basis_vector(3, 0), basis_vector(3, 0), basis_vector(3, 0)}, 4);
    EXPECT_LT(chain_correlation_matrix(vac, 1, 3).norm(), 1e-15);
    const auto one = product_state({Eigen::Vector2cd(1, 0), basis_vector(3, 0), basis_vector(3, 1), basis_vector(3, 0)}, 4);
    cmat expected = cmat::Zero(3, 3);
    expected(1, 1) = 1.0;
    EXPECT_LT((chain_correlation_matrix(one, 1, 3) - expected).norm(), 1e-14);
    EXPECT_THROW(chain_correlation_matrix(one, 0, 3), InvalidInput);
    EXPECT_THROW(chain_correlation_matrix(one, 1, 4), InvalidInput);
}

TEST(ChainCorrelation, MatchesDenseAndIsPsd) {
    const std::vector<Index> dims{2, 3, 3, 3};
    const auto psi = random_mps(dims, 6, 99);
    const cvec v = to_dense(psi);
    const cmat c = chain_correlation_matrix(psi, 1, 3);
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::size_t m = 1; m <= 3; ++m) {
            const cmat op = embed(dims, n, ladder::creation(3)) * embed(dims, m, ladder::annihilation(3));
            const auto ref = v.dot(op * v) / v.squaredNorm();
            EXPECT_LT(std::abs(c(static_cast<Index>(n - 1), static_cast<Index>(m - 1)) - ref), 1e-10);
        }
    EXPECT_LT((c - c.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<cmat> es(c);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);

    const cmat sub = chain_correlation_matrix(psi, 2, 3);
    EXPECT_LT((sub - c.bottomRightCorner(2, 2)).norm(), 1e-12);
}

TEST(BathSpectrum, SumRuleAndZero) {
    const auto Jb = thermalize(SpectralDensity::ohmic(0.1), 2.0);
    const auto rc = stieltjes_recurrence(Jb, 50);
    const auto kernel = transform_kernel_quadrature(Jb, rc, 2000);

    const auto zero = bath_spectrum(cmat::Zero(50, 50), kernel);
    for (double n : zero.n_omega) EXPECT_EQ(n, 0.0);

    std::mt19937 rng(4);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(50, 50);
    for (Index i = 0; i < 50; ++i)
        for (Index j = 0; j < 50; ++j) a(i, j) = g(rng);
    const cmat c = (a * a.transpose() / 50.0).cast<std::complex<double>>();
    const auto spec = bath_spectrum(c, kernel);
    EXPECT_NEAR(integrated_occupation(spec, kernel), c.trace().real(), 1e-8);
    for (double n : spec.n_omega) EXPECT_GE(n, -1e-12);

    EXPECT_THROW(bath_spectrum(cmat::Zero(51, 51), kernel), InvalidInput);
    EXPECT_THROW(bath_spectrum(cmat::Zero(3, 4), kernel), InvalidInput);
    const auto grid_only = transform_kernel(Jb, rc, {0.1, 0.2});
    EXPECT_THROW(integrated_occupation(bath_spectrum(c, grid_only), grid_only), InvalidInput);
}

TEST(PhysicalOccupation, SymmetricAndOneSided) {
    BathSpectrum s;
    s.omegas = {-0.5, -0.25, 0.0, 0.25, 0.5};
    s.n_omega = {0.3, 0.7, 1.0, 0.7, 0.3};
    auto p = physical_occupation(s);
    EXPECT_TRUE(std::isnan(p.n_thermal[0]));
    EXPECT_TRUE(std::isnan(p.n_thermal[2]));
    EXPECT_EQ(p.n_thermal[3], 0.0);
    EXPECT_EQ(p.n_thermal[4], 0.0);

    s.n_omega = {0.0, 0.0, 0.0, 0.4, 0.1};
    p = physical_occupation(s);
    EXPECT_EQ(p.n_thermal[3], 0.4);
    EXPECT_EQ(p.n_thermal[4], 0.1);

    s.omegas = {-0.5, -0.2, 0.0, 0.25, 0.5};
    EXPECT_THROW(physical_occupation(s), InvalidInput);
}

TEST(Peaks, ParabolicRefinementIsExactOnQuadratics) {
    std::vector<double> x, y;
    for (int i = -10; i <= 10; ++i) {
        x.push_back(0.1 * i);
        y.push_back(2.0 - 3.0 * std::pow(x.back() - 0.31, 2));
    }
    const auto p = find_peak(x, y, true, 0.0);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->omega, 0.31, 1e-12);
    EXPECT_NEAR(p->value, 2.0, 1e-12);
    EXPECT_FALSE(find_peak(x, y, true, 5.0));
}

TEST(Peaks, AbsentNegativePeak) {
    BathSpectrum s;
    for (int i = -20; i <= 20; ++i) {
        const double w = 0.05 * i;
        s.omegas.push_back(w);
        s.n_omega.push_back(w > 0 ? std::exp(-std::pow((w - 0.4) / 0.1, 2)) : 0.0);
    }
    EXPECT_FALSE(peak_ratio(s));
}

TEST(Peaks, PlantedDetailedBalance) {
    const std::vector<double> betas{2.0, 4.0, 6.0, 10.0};
    std::vector<double> ratios;
    for (double beta : betas) {
        BathSpectrum s;
        const double np = 3.0, nn = (np + 1.0) / std::exp(beta * 1.0);
        for (int i = -100; i <= 100; ++i) {
            const double w = 0.01 * i;
            s.omegas.push_back(w);
            s.n_omega.push_back(np * std::exp(-std::pow((w - 0.3) / 0.05, 2)) +
                                nn * std::exp(-std::pow((w + 0.3) / 0.05, 2)));
        }
        const auto r = peak_ratio(s);
        ASSERT_TRUE(r);
        EXPECT_NEAR(r->omega_p, 0.3, 1e-9);
        EXPECT_NEAR(r->omega_n, -0.3, 1e-9);
        ratios.push_back(r->ratio);
    }
    const auto fit = fit_detailed_balance(betas, ratios);
    EXPECT_NEAR(fit.epsilon, 1.0, 1e-6);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-9);
    EXPECT_THROW(fit_detailed_balance({1.0}, {-1.0}), InvalidInput);
}

TEST(DecayTime, ExponentialRelaxation) {
    std::vector<double> t, sz;
    for (int i = 0; i <= 4000; ++i) {
        t.push_back(0.01 * i);
        sz.push_back(std::exp(-t.back() / 2.0));
    }
    const auto td = decay_time(t, sz, 5.0, 1e-4);
    ASSERT_TRUE(td);
    EXPECT_NEAR(*td, 2.0 * std::log(5000.0), 0.02);
    EXPECT_FALSE(decay_time(std::vector<double>(t.begin(), t.begin() + 1500), std::vector<double>(sz.begin(), sz.begin() + 1500)));
}

TEST(SettlingTime, NoisyRelaxation) {
    std::vector<double> t, sz;
    for (int i = 0; i <= 6000; ++i) {
        t.push_back(0.01 * i);
        sz.push_back(-0.5 + 1.5 * std::exp(-t.back() / 2.0) + 0.02 * std::sin(37.0 * t.back()));
    }
    EXPECT_FALSE(decay_time(t, sz));
    const auto ts = settling_time(t, sz, 0.1);
    ASSERT_TRUE(ts);
    EXPECT_GT(*ts, 2.0 * std::log(1.5 / 0.12));
    EXPECT_LT(*ts, 2.0 * std::log(1.5 / 0.08));
    std::vector<double> ramp(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ramp[i] = t[i];
    EXPECT_FALSE(settling_time(t, ramp, 0.1));
    EXPECT_FALSE(settling_time({0.0}, {1.0}, 0.1));
}
