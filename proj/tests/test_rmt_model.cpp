#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rankest/rmt_model.hpp"
#include "support/laguerre.hpp"

using namespace rankest;

TEST(NullStandardization, SquareCase) {
    for (std::size_t n : {10u, 100u, 1000u}) {
        const auto z = null_standardization(NoiseModel(n, n, 1.0));
        EXPECT_NEAR(z.mu, 4.0, 1e-12);
        EXPECT_NEAR(z.sd, std::pow(2.0, 4.0 / 3.0) * std::pow(static_cast<double>(n), -2.0 / 3.0), 1e-12);
    }
}

TEST(NullStandardization, HandValues) {
    const auto z = null_standardization(NoiseModel(9, 45, 1.0));
    EXPECT_NEAR(z.mu, 2.09443, 1e-5);
    EXPECT_NEAR(z.sd, 0.16920, 1e-5);
    const auto z2 = null_standardization(NoiseModel(9, 45, 2.0));
    EXPECT_DOUBLE_EQ(z2.mu, 2.0 * z.mu);
    EXPECT_DOUBLE_EQ(z2.sd, 2.0 * z.sd);
}

TEST(SpikedStandardization, HandValues) {
    const auto z = spiked_standardization(NoiseModel(9, 45, 1.0), 1.0);
    EXPECT_NEAR(z.mu, 2.4, 1e-12);
    EXPECT_NEAR(z.sd, 2.0 * std::sqrt(0.8 / 45.0), 1e-12);
    EXPECT_NEAR(z.sd, 0.26667, 1e-5);
}

TEST(SpikedStandardization, BoundaryAndLimits) {
    const NoiseModel m(9, 45, 1.0);
    const double c = m.critical_strength();
    EXPECT_THROW(spiked_standardization(m, c), SubcriticalError);
    EXPECT_THROW(spiked_standardization(m, 0.2), SubcriticalError);
    const auto z = spiked_standardization(m, c * (1 + 1e-9));
    EXPECT_NEAR(z.mu, bulk_edge(m), 1e-8);
    EXPECT_LT(z.sd, 1e-4);
    // gamma ~ 0: location collapses to lambda + sigma^2.
    const NoiseModel wide(1, 1000000000000ull, 1.0);
    EXPECT_NEAR(spiked_standardization(wide, 3.0).mu, 4.0, 1e-11);
}

TEST(SpikedStandardization, MeanIncreasingAboveTransition) {
    const NoiseModel m(20, 100, 1.0);
    double prev = -1.0;
    for (double l = m.critical_strength() * 1.001; l < 10.0; l *= 1.1) {
        const double mu = spiked_standardization(m, l).mu;
        EXPECT_GT(mu, prev);
        prev = mu;
    }
}

TEST(Detectability, StrictInequality) {
    const NoiseModel m(9, 45, 1.0);
    EXPECT_FALSE(is_detectable(m, m.critical_strength()));
    EXPECT_FALSE(is_detectable(m, 0.0));
    EXPECT_TRUE(is_detectable(m, 0.5));
    EXPECT_THROW(is_detectable(m, -1.0), DomainError);
}

TEST(BulkEdge, Values) {
    EXPECT_DOUBLE_EQ(bulk_edge(NoiseModel(10, 10, 1.0)), 4.0);
    EXPECT_NEAR(bulk_edge(NoiseModel(9, 45, 1.0)), 2.09443, 1e-5);
    for (std::size_t n : {10u, 100u, 1000u}) {
        const NoiseModel m(n, 5 * n, 1.0);
        EXPECT_NEAR(bulk_edge(m), null_standardization(m).mu, 1e-12);
    }
}

TEST(Overlap, Values) {
    const NoiseModel m(9, 45, 1.0);
    EXPECT_EQ(eigenvector_overlap(m, m.critical_strength()), 0.0);
    EXPECT_EQ(eigenvector_overlap(m, 0.1), 0.0);
    EXPECT_NEAR(eigenvector_overlap(m, 1.0), std::sqrt(0.8 / 1.2), 1e-12);
    EXPECT_NEAR(eigenvector_overlap(m, 1e9), 1.0, 1e-9);
    EXPECT_THROW(eigenvector_overlap(m, 0.0), DomainError);
}

TEST(Overlap, MonteCarloRealData) {
    const std::size_t n = 400, N = 2000;
    const oracle::SpikedLaguerre model(n, N, 1, 1.0);
    std::mt19937_64 rng(99);
    double sum = 0.0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) sum += model.largest_with_overlap(rng).second;
    EXPECT_NEAR(sum / reps, eigenvector_overlap(NoiseModel(n, N, 1.0, Field::real), 1.0), 0.02);
}

TEST(Risk, Limits) {
    const NoiseModel m(9, 45, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_NEAR(asymptotic_risk(m, NullHypothesis{}, 1e6, 1, 2), 0.0, 1e-300);
    EXPECT_NEAR(asymptotic_risk(m, SignalHypothesis{1.0}, 1e6, 1, 2), 2.0, 1e-15);
    EXPECT_NEAR(asymptotic_risk(m, NullHypothesis{}, -1e6, 3, 2), 3.0, 1e-15);
    EXPECT_NEAR(asymptotic_risk(m, SignalHypothesis{1.0}, -1e6, 3, 2), 0.0, 1e-300);
    EXPECT_NEAR(asymptotic_risk(m, NullHypothesis{}, inf, 1, 1), 0.0, 1e-300);
    EXPECT_THROW(asymptotic_risk(m, NullHypothesis{}, std::nan(""), 1, 1), DomainError);
    EXPECT_THROW(asymptotic_risk(m, SignalHypothesis{0.3}, 2.0, 1, 1), SubcriticalError);
    EXPECT_THROW(asymptotic_risk(m, NullHypothesis{}, 2.0, -1, 1), DomainError);
}

TEST(Risk, HandComposition) {
    const NoiseModel m(9, 45, 1.0);
    const auto& tw = tracy_widom_table(2);
    EXPECT_NEAR(asymptotic_risk(m, NullHypothesis{}, 2.4, 1, 1), 1.0 - tw_cdf(tw, (2.4 - 2.09441) / 0.16920), 1e-4);
    EXPECT_NEAR(asymptotic_risk(m, SignalHypothesis{1.0}, 2.4, 1, 1), 0.5, 1e-12);
}

TEST(Risk, MonotoneInThreshold) {
    const NoiseModel m(9, 45, 1.0);
    double pn = 2.0, pa = -1.0;
    for (double T = 1.5; T < 3.0; T += 0.01) {
        const double rn = asymptotic_risk(m, NullHypothesis{}, T, 1, 1);
        const double ra = asymptotic_risk(m, SignalHypothesis{1.0}, T, 1, 1);
        EXPECT_LT(rn, pn);
        EXPECT_GT(ra, pa);
        pn = rn;
        pa = ra;
    }
}

TEST(SpikedModel, Validation) {
    const NoiseModel m(4, 20, 2.0);
    const SpikedModel s(m, {3.0, 1.0});
    EXPECT_EQ(s.population_eigenvalues(), (std::vector<double>{5.0, 3.0, 2.0, 2.0}));
    EXPECT_THROW(SpikedModel(m, {1.0, 3.0}), DomainError);
    EXPECT_THROW(SpikedModel(m, {1.0, 1.0}), DomainError);
    EXPECT_THROW(SpikedModel(m, {4, 3, 2, 1}), DomainError);
    EXPECT_THROW(NoiseModel(0, 1, 1.0), DomainError);
    EXPECT_THROW(NoiseModel(1, 1, 0.0), DomainError);
}
