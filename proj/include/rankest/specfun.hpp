#pragma once

// Scalar special functions: Airy Ai and its derivative, standard normal
// distribution function and quantile.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rankest/error.hpp"

namespace rankest {

namespace detail {

inline constexpr double kAiryAtZero = 0.355028053887817239260;       // Ai(0)
inline constexpr double kAiryPrimeAtZero = -0.258819403792806798405;  // Ai'(0)

// Maclaurin series on [kAirySeriesLow, kAirySeriesHigh]; asymptotic
// expansions below kAirySeriesLow and above kAiryAsymptoticHigh. In between,
// the Airy equation is stepped leftward from kAiryAsymptoticHigh by local
// Taylor series: Ai grows in that direction, so the Maclaurin cancellation
// (relative error ~ eps Bi/Ai) is avoided.
inline constexpr double kAirySeriesLow = -7.0;
inline constexpr double kAirySeriesHigh = 2.0;
inline constexpr double kAiryAsymptoticHigh = 9.0;

struct AiryPair {
    double ai;
    double aip;
};

inline AiryPair airy_maclaurin(double x) {
    // Ai(x) = Ai(0) f(x) + Ai'(0) g(x)
    // f = sum_k x^{3k} / prod_{j<=k} (3j-1)(3j)
    // g = sum_k x^{3k+1} / prod_{j<=k} (3j)(3j+1)
    const double x3 = x * x * x;
    double f = 1.0, g = x, df = 0.0, dg = 1.0;
    double f_coef = 1.0, g_coef = 1.0;  // products of reciprocals
    double x3k = 1.0;                   // x^{3k}
    for (int k = 1; k < 200; ++k) {
        const double prev_x3k = x3k;
        x3k *= x3;
        f_coef /= (3.0 * k - 1.0) * (3.0 * k);
        g_coef /= (3.0 * k) * (3.0 * k + 1.0);
        const double f_term = f_coef * x3k;
        const double g_term = g_coef * x3k * x;
        // d/dx x^{3k} = 3k x^{3k-1} = 3k x^2 x^{3(k-1)}
        const double df_term = f_coef * 3.0 * k * x * x * prev_x3k;
        const double dg_term = g_coef * (3.0 * k + 1.0) * x3k;
        f += f_term;
        g += g_term;
        df += df_term;
        dg += dg_term;
        const double scale = std::abs(f) + std::abs(g) + std::abs(df) + std::abs(dg);
        const double last = std::abs(f_term) + std::abs(g_term) + std::abs(df_term) + std::abs(dg_term);
        if (last <= 1e-18 * scale && k > 2) break;
    }
    return {kAiryAtZero * f + kAiryPrimeAtZero * g, kAiryAtZero * df + kAiryPrimeAtZero * dg};
}

// Coefficients u_k, v_k of the large-argument expansions:
// u_k = (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k) u_{k-1},  v_k = -(6k+1)/(6k-1) u_k.
inline constexpr int kAiryAsymptoticTerms = 40;

inline double airy_u(int k) {
    double u = 1.0;
    for (int j = 1; j <= k; ++j) {
        u *= (6.0 * j - 5.0) * (6.0 * j - 3.0) * (6.0 * j - 1.0) / ((2.0 * j - 1.0) * 216.0 * j);
    }
    return u;
}

inline double airy_v(int k) { return k == 0 ? 1.0 : -(6.0 * k + 1.0) / (6.0 * k - 1.0) * airy_u(k); }

// Sums sum_k sign(k) c_k z^{-k} with optimal truncation (stop at the
// smallest term).
template <class Coef, class Sign>
double asymptotic_sum(double zeta, int first, int stride, Coef coef, Sign sign) {
    double sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = first; k < kAiryAsymptoticTerms; k += stride) {
        const double term = coef(k) * std::pow(zeta, -k);
        if (std::abs(term) > prev) break;
        sum += sign(k) * term;
        prev = std::abs(term);
        if (prev < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

inline AiryPair airy_asymptotic_positive(double x) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const auto alt = [](int k) { return k % 2 ? -1.0 : 1.0; };
    const double su = asymptotic_sum(zeta, 0, 1, airy_u, alt);
    const double sv = asymptotic_sum(zeta, 0, 1, airy_v, alt);
    const double e = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
    const double x14 = std::pow(x, 0.25);
    return {e / x14 * su, -e * x14 * sv};
}

inline AiryPair airy_asymptotic_negative(double x) {
    const double ax = -x;
    const double zeta = 2.0 / 3.0 * ax * std::sqrt(ax);
    // sum_k (-1)^k c_{2k} z^{-2k} and sum_k (-1)^k c_{2k+1} z^{-2k-1}
    const auto even_sign = [](int k) { return (k / 2) % 2 ? -1.0 : 1.0; };
    const auto odd_sign = [](int k) { return ((k - 1) / 2) % 2 ? -1.0 : 1.0; };
    const double ue = asymptotic_sum(zeta, 0, 2, airy_u, even_sign);
    const double uo = asymptotic_sum(zeta, 1, 2, airy_u, odd_sign);
    const double ve = asymptotic_sum(zeta, 0, 2, airy_v, even_sign);
    const double vo = asymptotic_sum(zeta, 1, 2, airy_v, odd_sign);
    const double phase = zeta + std::numbers::pi / 4.0;
    const double s = std::sin(phase), c = std::cos(phase);
    const double x14 = std::pow(ax, 0.25);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    return {inv_sqrt_pi / x14 * (s * ue - c * uo), -inv_sqrt_pi * x14 * (c * ve + s * vo)};
}

// Solution of y'' = x y at x0 + h from (y, y') at x0.
inline AiryPair airy_taylor_step(double x0, AiryPair start, double h) {
    // a_{k+2} = (x0 a_k + a_{k-1}) / ((k+1)(k+2))
    double a_prev = 0.0, a0 = start.ai, a1 = start.aip;
    double y = a0 + a1 * h, yp = a1;
    double hk = h;  // h^k for the current a1-index k
    for (int k = 0; k < 200; ++k) {
        const double a2 = (x0 * a0 + a_prev) / ((k + 1.0) * (k + 2.0));
        const double y_term = a2 * hk * h;
        const double yp_term = (k + 2.0) * a2 * hk;
        y += y_term;
        yp += yp_term;
        a_prev = a0;
        a0 = a1;
        a1 = a2;
        hk *= h;
        if (k > 3 && std::abs(y_term) <= 1e-18 * std::abs(y) && std::abs(yp_term) <= 1e-18 * std::abs(yp)) break;
    }
    return {y, yp};
}

inline AiryPair airy_stepped(double x) {
    double x0 = kAiryAsymptoticHigh;
    AiryPair y = airy_asymptotic_positive(x0);
    const int steps = static_cast<int>(std::ceil(x0 - x));
    const double h = (x - x0) / std::max(steps, 1);
    for (int i = 0; i < steps; ++i) {
        y = airy_taylor_step(x0, y, h);
        x0 += h;
    }
    return y;
}

inline AiryPair airy(double x) {
    if (x > kAiryAsymptoticHigh) return airy_asymptotic_positive(x);
    if (x > kAirySeriesHigh) return airy_stepped(x);
    if (x < kAirySeriesLow) return airy_asymptotic_negative(x);
    return airy_maclaurin(x);
}

}  // namespace detail

/// Airy function Ai(x).
inline double airy_ai(double x) { return detail::airy(x).ai; }

/// Derivative Ai'(x).
inline double airy_ai_prime(double x) { return detail::airy(x).aip; }

/// Standard normal distribution function. Accepts +-infinity.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal density.
inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Inverse of std_normal_cdf on (0, 1). Acklam's rational approximation
/// followed by Halley refinement against the erfc-based cdf.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("std_normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int it = 0; it < 3; ++it) {
        // Work in the tail that keeps the residual well conditioned.
        const double e = x < 0 ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_cdf(-x);
        const double u = e / std_normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

}  // namespace rankest
