#pragma once

// Minimax threshold for the single inclusion test "ell_1 > T". T equalizes
// the null risk c_I (1 - F_beta(z)) and the worst alternative risk
// c_E Phi(z(lambda_0)); the difference is strictly decreasing in T, so the
// root is unique and found by bisection.
//
// lemma1_threshold / lemma2_threshold give the small-h behaviour of the
// standardized threshold t = (T - mu)/sd when lambda_0 = sqrt(gamma) + h
// (sigma^2 = 1 scale). They are expressed through
//
//   a     = sd_null / sd_small_h,   sd_small_h = 2 beta^{-1/2} G sqrt(h/N),
//   shift = (h^2 / sqrt(gamma)) / sd_small_h,   G = gamma^{1/4} + gamma^{-1/4},
//
// so that (T - mu(lambda_0)) / sd(lambda_0) ~ a t - shift. sd_null is the
// exact finite-(n, N) null scale.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rankest/error.hpp"
#include "rankest/rmt_model.hpp"
#include "rankest/specfun.hpp"
#include "rankest/tracy_widom.hpp"

namespace rankest {

struct ThresholdProblem {
    NoiseModel noise;
    double lambda0;      // minimal signal strength, raw scale
    double c_inclusion;  // c_I
    double c_exclusion;  // c_E
};

struct ThresholdSolution {
    double threshold;     // T, raw eigenvalue scale
    double standardized;  // t = (T - mu) / sd
    double residual;      // |c_I (1 - F(t)) - c_E Phi(z0)|
    double max_risk;      // common value of the two risks
};

/// Signed difference c_I (1 - F_beta(z)) - c_E Phi(z0) at threshold T.
inline double threshold_equation(const ThresholdProblem& p, double threshold) {
    const auto null = null_standardization(p.noise);
    const auto alt = spiked_standardization(p.noise, p.lambda0);
    return p.c_inclusion * tw_survival(tracy_widom_table(p.noise.beta()), null.standardize(threshold)) -
           p.c_exclusion * std_normal_cdf(alt.standardize(threshold));
}

/// max(R(0, T), R(lambda_0, T)).
inline double minimax_risk(const ThresholdProblem& p, double threshold) {
    return std::max(asymptotic_risk(p.noise, NullHypothesis{}, threshold, p.c_inclusion, p.c_exclusion),
                    asymptotic_risk(p.noise, SignalHypothesis{p.lambda0}, threshold, p.c_inclusion, p.c_exclusion));
}

/// Bisection on the threshold equation. The bracket starts at
/// [mu - 10 sd, mu(lambda_0) + 10 sd(lambda_0)] and grows geometrically
/// until the sign changes; throws BracketingError if it never does (for
/// instance when a cost is zero).
inline ThresholdSolution solve_minimax_threshold(const ThresholdProblem& p) {
    if (!(p.c_inclusion >= 0.0) || !(p.c_exclusion >= 0.0) || !std::isfinite(p.c_inclusion) ||
        !std::isfinite(p.c_exclusion)) {
        throw DomainError("threshold costs must be finite and nonnegative");
    }
    const auto null = null_standardization(p.noise);
    const auto alt = spiked_standardization(p.noise, p.lambda0);  // throws when subcritical

    auto g = [&](double T) { return threshold_equation(p, T); };
    double lo = null.mu - 10.0 * null.sd;
    double hi = alt.mu + 10.0 * alt.sd;
    double width = hi - lo;
    for (int i = 0; g(lo) <= 0.0; ++i) {
        if (i == 60) throw BracketingError("threshold equation: no sign change below the bracket");
        lo -= width;
        width *= 2.0;
    }
    width = hi - lo;
    for (int i = 0; g(hi) >= 0.0; ++i) {
        if (i == 60) throw BracketingError("threshold equation: no sign change above the bracket");
        hi += width;
        width *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double T = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
    const double residual = std::abs(g(T));
    const double null_risk = asymptotic_risk(p.noise, NullHypothesis{}, T, p.c_inclusion, p.c_exclusion);
    return {T, null.standardize(T), residual, null_risk};
}

/// Small-h quantities on the sigma^2 = 1 scale.
struct SmallHExpansion {
    double mu_shift;    // mu(sqrt(gamma) + h) - mu ~ h^2 / sqrt(gamma)
    double sd_small_h;  // sd(sqrt(gamma) + h) ~ 2 beta^{-1/2} G sqrt(h/N)
    double slope;       // a = sd_null / sd_small_h
    double offset;      // mu_shift / sd_small_h

    /// Leading-order (T(t) - mu(lambda_0)) / sd(lambda_0).
    double standardized_argument(double t) const { return slope * t - offset; }
};

inline double gamma_quarter_sum(double gamma) { return std::pow(gamma, 0.25) + std::pow(gamma, -0.25); }

inline SmallHExpansion appendix_b_expansions(double h, const NoiseModel& noise) {
    if (!(h >= 0.0)) throw DomainError("appendix_b_expansions: h must be nonnegative");
    const NoiseModel unit = noise.with_sigma2(1.0);
    const double gamma = unit.gamma();
    const double N = static_cast<double>(unit.window());
    SmallHExpansion e;
    e.mu_shift = h * h / std::sqrt(gamma);
    e.sd_small_h = 2.0 / std::sqrt(static_cast<double>(unit.beta())) * gamma_quarter_sum(gamma) * std::sqrt(h / N);
    const double sd_null = null_standardization(unit).sd;
    e.slope = h > 0.0 ? sd_null / e.sd_small_h : std::numeric_limits<double>::infinity();
    e.offset = h > 0.0 ? e.mu_shift / e.sd_small_h : 0.0;
    return e;
}

enum class Lemma1Case { exclusion_dominant = 1, inclusion_dominant = 2, balanced = 3 };

struct Lemma1Result {
    Lemma1Case which;
    double standardized;
};

/// Leading-order t for h = o(N^{-1/3}). The case is chosen by comparing
/// c_E with (1 - F_beta(0)) c_I; equality within 1e-12 c_I selects the
/// implicit third case, solved by damped fixed-point iteration on t^2.
inline Lemma1Result lemma1_threshold(double h, const NoiseModel& noise, double c_inclusion, double c_exclusion) {
    if (!(h > 0.0)) throw DomainError("lemma1_threshold: h must be positive");
    if (!(c_inclusion > 0.0) || !(c_exclusion > 0.0)) throw DomainError("lemma1_threshold: costs must be positive");
    const auto& tw = tracy_widom_table(noise.beta());
    const double a = appendix_b_expansions(h, noise).slope;
    const double ratio = c_exclusion / c_inclusion;
    const double tail0 = tw_survival(tw, 0.0);
    // Mills-ratio tail factor: c_E/c_I * phi(a t) / (a t) = factor(t) / t
    const double prefactor = ratio / (std::sqrt(2.0 * std::numbers::pi) * a);

    if (std::abs(c_exclusion - tail0 * c_inclusion) <= 1e-12 * c_inclusion) {
        const double A = prefactor / tw_pdf(tw, 0.0);
        const double B = 0.5 * a * a;
        double x = A;
        for (int it = 0; it < 10000; ++it) {
            const double damping = 1.0 / (1.0 + B * x);
            const double next = (1.0 - damping) * x + damping * A * std::exp(-B * x);
            if (std::abs(next - x) <= 1e-10 * std::max(1.0, x)) return {Lemma1Case::balanced, std::sqrt(next)};
            x = next;
        }
        throw ConvergenceError("lemma1_threshold: fixed-point iteration did not converge");
    }
    if (c_exclusion > tail0 * c_inclusion) {
        return {Lemma1Case::exclusion_dominant, std_normal_quantile(tail0 / ratio) / a};
    }
    const double t0 = tw_quantile(tw, 1.0 - ratio);
    const double correction = prefactor / (tw_pdf(tw, t0) * t0) * std::exp(-0.5 * a * a * t0 * t0);
    return {Lemma1Case::inclusion_dominant, t0 + correction};
}

struct Lemma2Result {
    double standardized;        // root of the asymptotic relation
    double large_exclusion;     // c_E >> c_I limit
    double small_exclusion;     // c_E << c_I limit
};

/// h = h0 N^{-1/3}: solves c_I (1 - F_beta(t)) = c_E Phi(a t - shift) for t
/// by bisection and reports the two extreme-cost-ratio limits
///   c_E >> c_I:  t ~ -sqrt(8 h0 / (beta G^{1/6}) log(c_E/c_I))
///   c_E << c_I:  t ~ ((3/(2 beta)) log(c_I/c_E))^{2/3}.
/// A limit whose log is negative is reported as NaN.
inline Lemma2Result lemma2_threshold(double h0, const NoiseModel& noise, double c_inclusion, double c_exclusion) {
    if (!(h0 > 0.0)) throw DomainError("lemma2_threshold: h0 must be positive");
    if (!(c_inclusion > 0.0) || !(c_exclusion > 0.0)) throw DomainError("lemma2_threshold: costs must be positive");
    const auto& tw = tracy_widom_table(noise.beta());
    const double N = static_cast<double>(noise.window());
    const auto e = appendix_b_expansions(h0 * std::cbrt(1.0 / N), noise);
    auto g = [&](double t) {
        return c_inclusion * tw_survival(tw, t) - c_exclusion * std_normal_cdf(e.standardized_argument(t));
    };
    double lo = -20.0, hi = 20.0;
    for (int i = 0; g(lo) <= 0.0; ++i) {
        if (i == 60) throw BracketingError("lemma2_threshold: no sign change below the bracket");
        lo *= 2.0;
    }
    for (int i = 0; g(hi) >= 0.0; ++i) {
        if (i == 60) throw BracketingError("lemma2_threshold: no sign change above the bracket");
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double beta = noise.beta();
    const double G = gamma_quarter_sum(noise.gamma());
    const double log_ratio = std::log(c_exclusion / c_inclusion);
    Lemma2Result r;
    r.standardized = 0.5 * (lo + hi);
    r.large_exclusion = log_ratio > 0.0 ? -std::sqrt(8.0 * h0 / (beta * std::pow(G, 1.0 / 6.0)) * log_ratio)
                                        : std::numeric_limits<double>::quiet_NaN();
    r.small_exclusion = log_ratio < 0.0 ? std::pow(1.5 / beta * -log_ratio, 2.0 / 3.0)
                                        : std::numeric_limits<double>::quiet_NaN();
    return r;
}

/// Raw threshold for a standardized t under `noise` (undoes the sigma^2 = 1
/// convention of the lemmas).
inline double threshold_from_standardized(const NoiseModel& noise, double t) {
    return null_standardization(noise).unstandardize(t);
}

}  // namespace rankest
