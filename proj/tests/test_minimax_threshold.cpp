#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankest/minimax_threshold.hpp"

using namespace rankest;

namespace {

const NoiseModel kArray(9, 45, 1.0);

double default_lambda(const NoiseModel& m) { return std::sqrt(m.gamma()) + std::cbrt(1.0 / 45.0); }

ThresholdProblem random_problem(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dim(2, 50), ratio(1, 10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = dim(rng);
    const NoiseModel m(n, n * ratio(rng), 0.5 + 1.5 * u(rng), u(rng) < 0.5 ? Field::real : Field::complex);
    const double lambda0 = m.critical_strength() * (1.05 + 2.0 * u(rng));
    return {m, lambda0, std::pow(10.0, -1.0 + 2.0 * u(rng)), std::pow(10.0, -1.0 + 2.0 * u(rng))};
}

// Minimizer of max(R(0, T), R(lambda_0, T)) by grid search: a 1e-4 grid over
// the full bracket, then a 1e-7 grid around the best coarse point.
double grid_minimax(const ThresholdProblem& p) {
    const auto null = null_standardization(p.noise);
    const auto alt = spiked_standardization(p.noise, p.lambda0);
    auto best_on = [&](double lo, double hi, double step) {
        double best_t = lo, best = minimax_risk(p, lo);
        for (double T = lo; T <= hi; T += step) {
            const double r = minimax_risk(p, T);
            if (r < best) best = r, best_t = T;
        }
        return best_t;
    };
    const double coarse = best_on(null.mu - 10 * null.sd, alt.mu + 10 * alt.sd, 1e-4 * p.noise.sigma2());
    return best_on(coarse - 2e-4 * p.noise.sigma2(), coarse + 2e-4 * p.noise.sigma2(), 1e-7 * p.noise.sigma2());
}

}  // namespace

TEST(SolveMinimax, ResidualBound) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_problem(rng);
        const auto s = solve_minimax_threshold(p);
        EXPECT_LE(s.residual, 1e-10 * (p.c_inclusion + p.c_exclusion));
        EXPECT_NEAR(s.standardized, null_standardization(p.noise).standardize(s.threshold), 1e-12);
    }
}

TEST(SolveMinimax, ArrayExampleMatchesFullGrid) {
    const ThresholdProblem p{kArray, default_lambda(kArray), 1.0, 1.0};
    const auto null = null_standardization(p.noise);
    const auto alt = spiked_standardization(p.noise, p.lambda0);
    double best_t = 0.0, best = 1e300;
    for (double T = null.mu - 10 * null.sd; T <= alt.mu + 10 * alt.sd; T += 1e-7) {
        const double r = minimax_risk(p, T);
        if (r < best) best = r, best_t = T;
    }
    const auto s = solve_minimax_threshold(p);
    EXPECT_NEAR(s.threshold, best_t, 1e-6);
    EXPECT_NEAR(s.threshold, 1.97043, 1e-5);  // C_E = 1, the last index of the equal-cost sequence
}

TEST(SolveMinimax, RandomProblemsMatchGrid) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_problem(rng);
        EXPECT_NEAR(solve_minimax_threshold(p).threshold, grid_minimax(p), 1e-6 * p.noise.sigma2()) << "problem " << i;
    }
}

TEST(SolveMinimax, RisksEqualizedAndLocallyOptimal) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_problem(rng);
        const auto s = solve_minimax_threshold(p);
        const double r0 = asymptotic_risk(p.noise, NullHypothesis{}, s.threshold, p.c_inclusion, p.c_exclusion);
        const double r1 =
            asymptotic_risk(p.noise, SignalHypothesis{p.lambda0}, s.threshold, p.c_inclusion, p.c_exclusion);
        EXPECT_NEAR(r0, r1, 1e-10 * (p.c_inclusion + p.c_exclusion));
        EXPECT_NEAR(s.max_risk, std::max(r0, r1), 1e-10 * (p.c_inclusion + p.c_exclusion));
        // A stronger signal only lowers the exclusion risk.
        EXPECT_LE(asymptotic_risk(p.noise, SignalHypothesis{2 * p.lambda0}, s.threshold, p.c_inclusion, p.c_exclusion),
                  s.max_risk + 1e-15);
        for (double d : {1e-4, 1e-3}) {
            EXPECT_LE(minimax_risk(p, s.threshold), minimax_risk(p, s.threshold + d * p.noise.sigma2()));
            EXPECT_LE(minimax_risk(p, s.threshold), minimax_risk(p, s.threshold - d * p.noise.sigma2()));
        }
    }
}

TEST(SolveMinimax, UniqueSignChange) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 50; ++i) {
        const auto p = random_problem(rng);
        const auto null = null_standardization(p.noise);
        const auto alt = spiked_standardization(p.noise, p.lambda0);
        const double lo = null.mu - 10 * null.sd, hi = alt.mu + 10 * alt.sd;
        int changes = 0, last = 0;
        for (int k = 0; k <= 4000; ++k) {
            const double g = threshold_equation(p, lo + (hi - lo) * k / 4000.0);
            const int sign = g > 0 ? 1 : (g < 0 ? -1 : 0);
            if (sign != 0 && last != 0 && sign != last) ++changes;
            if (sign != 0) last = sign;
        }
        EXPECT_EQ(changes, 1) << "problem " << i;
    }
}

TEST(SolveMinimax, MonotoneInCosts) {
    const double lambda0 = default_lambda(kArray);
    double prev = 1e300;
    for (double ce : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        const double T = solve_minimax_threshold({kArray, lambda0, 1.0, ce}).threshold;
        EXPECT_LT(T, prev);
        prev = T;
    }
    prev = -1e300;
    for (double ci : {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        const double T = solve_minimax_threshold({kArray, lambda0, ci, 1.0}).threshold;
        EXPECT_GT(T, prev);
        prev = T;
    }
}

TEST(SolveMinimax, Errors) {
    const double lambda0 = default_lambda(kArray);
    EXPECT_THROW(solve_minimax_threshold({kArray, lambda0, 0.0, 1.0}), BracketingError);
    EXPECT_THROW(solve_minimax_threshold({kArray, lambda0, 1.0, 0.0}), BracketingError);
    EXPECT_THROW(solve_minimax_threshold({kArray, 0.3, 1.0, 1.0}), SubcriticalError);
    EXPECT_THROW(solve_minimax_threshold({kArray, lambda0, -1.0, 1.0}), DomainError);
}

TEST(SolveMinimax, ScalesWithSigma2) {
    const double rel = default_lambda(kArray);
    const double T1 = solve_minimax_threshold({kArray, rel, 1.0, 2.0}).threshold;
    const double T3 = solve_minimax_threshold({kArray.with_sigma2(3.0), 3.0 * rel, 1.0, 2.0}).threshold;
    EXPECT_NEAR(T3, 3.0 * T1, 1e-9);
}

TEST(AppendixB, MeanShiftIsThirdOrder) {
    const NoiseModel m(200, 1000, 1.0);
    const double mu0 = null_standardization(m).mu;
    const double g = std::sqrt(m.gamma());
    double prev = 0.0;
    for (double h = 0.08; h > 0.004; h /= 2) {
        const auto e = appendix_b_expansions(h, m);
        const double err = std::abs(spiked_standardization(m, g + h).mu - mu0 - e.mu_shift);
        if (prev > 0.0) EXPECT_NEAR(prev / err, 8.0, 1.0);
        prev = err;
    }
    EXPECT_EQ(appendix_b_expansions(0.0, m).mu_shift, 0.0);
    EXPECT_EQ(appendix_b_expansions(0.0, m).offset, 0.0);
}

TEST(AppendixB, SdExpansionConverges) {
    const NoiseModel m(200, 1000, 1.0);
    const double g = std::sqrt(m.gamma());
    double prev = 1e9;
    for (double h = 0.1; h > 1e-6; h /= 4) {
        const double exact = spiked_standardization(m, g + h).sd;
        const double rel = std::abs(appendix_b_expansions(h, m).sd_small_h / exact - 1.0);
        EXPECT_LT(rel, prev);
        prev = rel;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Lemma1, CaseSelection) {
    const NoiseModel m(1000, 1000, 1.0);
    const double tail0 = tw_survival(tracy_widom_table(2), 0.0);
    EXPECT_EQ(lemma1_threshold(1e-4, m, 1.0, tail0 * (1 + 1e-9)).which, Lemma1Case::exclusion_dominant);
    EXPECT_EQ(lemma1_threshold(1e-4, m, 1.0, tail0 * (1 - 1e-9)).which, Lemma1Case::inclusion_dominant);
    const auto balanced = lemma1_threshold(1e-4, m, 1.0, tail0);
    EXPECT_EQ(balanced.which, Lemma1Case::balanced);
    EXPECT_GT(balanced.standardized, 0.0);
    EXPECT_THROW(lemma1_threshold(0.0, m, 1.0, 1.0), DomainError);
}

TEST(Lemma1, InclusionDominantLimit) {
    const NoiseModel m(1000000, 1000000, 1.0);
    const double target = tw_quantile(tracy_widom_table(2), 1.0 - 0.01);
    double prev = 1e9;
    for (double h = 1e-3; h > 1e-9; h /= 10) {
        const auto r = lemma1_threshold(h, m, 1.0, 0.01);
        EXPECT_EQ(r.which, Lemma1Case::inclusion_dominant);
        const double err = std::abs(r.standardized - target);
        EXPECT_LE(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-6);
}

// Exact solver standardized t for lambda_0 = sqrt(gamma) + h at sigma^2 = 1.
static double exact_t(const NoiseModel& m, double h, double ci, double ce) {
    return solve_minimax_threshold({m, std::sqrt(m.gamma()) + h, ci, ce}).standardized;
}

TEST(Lemma1, ExclusionDominantMatchesSolver) {
    const NoiseModel m(1000000, 1000000, 1.0);
    const double h = 3e-5;
    const double t = lemma1_threshold(h, m, 1.0, 2.0).standardized;
    const double exact = exact_t(m, h, 1.0, 2.0);
    EXPECT_LT(t, 0.0);
    EXPECT_LT(std::abs(t / exact - 1.0), 0.15);
}

TEST(Lemma1, ConvergesAlongN) {
    double prev = 1e9;
    for (std::size_t N : {10000u, 100000u, 1000000u}) {
        const NoiseModel m(N, N, 1.0);
        const double h = 0.03 / std::sqrt(static_cast<double>(N));
        const double rel = std::abs(lemma1_threshold(h, m, 1.0, 2.0).standardized / exact_t(m, h, 1.0, 2.0) - 1.0);
        EXPECT_LT(rel, prev);
        prev = rel;
    }
}

TEST(Lemma2, EqualCostsMatchSolver) {
    const NoiseModel m(1000000, 1000000, 1.0);
    const double h = std::cbrt(1e-6);
    const double t = lemma2_threshold(1.0, m, 1.0, 1.0).standardized;
    EXPECT_LT(std::abs(t / exact_t(m, h, 1.0, 1.0) - 1.0), 0.15);
}

TEST(Lemma2, ConvergesAlongN) {
    double prev = 1e9;
    for (std::size_t N : {10000u, 100000u, 1000000u}) {
        const NoiseModel m(N, N, 1.0);
        const double h = std::cbrt(1.0 / static_cast<double>(N));
        const double rel = std::abs(lemma2_threshold(1.0, m, 1.0, 1.0).standardized / exact_t(m, h, 1.0, 1.0) - 1.0);
        EXPECT_LT(rel, prev);
        prev = rel;
    }
}

TEST(Lemma2, LargeExclusionCostGrowsLikeRootLog) {
    const NoiseModel m(1000000, 1000000, 1.0);
    for (double ratio : {1e4, 1e6, 1e8, 1e10}) {
        const auto r = lemma2_threshold(1.0, m, 1.0, ratio);
        EXPECT_LT(r.standardized, 0.0);
        EXPECT_LT(r.large_exclusion, 0.0);
        EXPECT_TRUE(std::isnan(r.small_exclusion));
    }
    // |t| / sqrt(log ratio) settles as the ratio grows.
    const double a = std::abs(lemma2_threshold(1.0, m, 1.0, 1e8).standardized) / std::sqrt(std::log(1e8));
    const double b = std::abs(lemma2_threshold(1.0, m, 1.0, 1e16).standardized) / std::sqrt(std::log(1e16));
    const double c = std::abs(lemma2_threshold(1.0, m, 1.0, 1e32).standardized) / std::sqrt(std::log(1e32));
    EXPECT_LT(std::abs(c - b), std::abs(b - a));
}

TEST(Lemma2, SmallExclusionCostLimit) {
    const NoiseModel m(1000000, 1000000, 1.0);
    double prev = 1e9;
    for (double ratio : {1e-6, 1e-12, 1e-24, 1e-48}) {
        const auto r = lemma2_threshold(1.0, m, 1.0, ratio);
        EXPECT_GT(r.standardized, 0.0);
        const double rel = std::abs(r.standardized / r.small_exclusion - 1.0);
        EXPECT_LT(rel, prev);
        prev = rel;
    }
    EXPECT_LT(prev, 0.1);
}

TEST(ThresholdFromStandardized, UsesNullScale) {
    const auto z = null_standardization(kArray.with_sigma2(2.0));
    EXPECT_DOUBLE_EQ(threshold_from_standardized(kArray.with_sigma2(2.0), -1.5), z.mu - 1.5 * z.sd);
}
