#pragma once

// Tracy-Widom distributions F_1 and F_2 built from the Hastings-McLeod
// solution of Painleve II,
//
//   q''(x) = x q(x) + 2 q(x)^3,   q(x) ~ Ai(x) as x -> +inf,
//
//   F_2(s) = exp(-int_s^inf (x - s) q(x)^2 dx)
//   F_1(s) = exp(-1/2 int_s^inf q(x) + (x - s) q(x)^2 dx).
//
// The ODE is integrated backward from x_max with Airy initial data. The
// integrals are carried as extra state: with u(s) = int_s^inf q^2,
// v(s) = int_s^inf (x - s) q^2 = int_s^inf u and w(s) = int_s^inf q,
//
//   u' = -q^2,  v' = -u,  w' = -q,
//   F_2 = exp(-v),          f_2 = F_2 u,
//   F_1 = exp(-(v + w)/2),  f_1 = F_1 (q + u)/2.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rankest/error.hpp"
#include "rankest/specfun.hpp"

namespace rankest {

/// Hastings-McLeod solution sampled on a uniform grid, together with the
/// running integrals needed for F_1 and F_2. Abscissae are ascending.
struct PainleveSolution {
    std::vector<double> x;
    std::vector<double> q;
    std::vector<double> dq;
    std::vector<double> int_q2;         // u(x) = int_x^inf q^2
    std::vector<double> int_shifted_q2;  // v(x) = int_x^inf (t - x) q(t)^2 dt
    std::vector<double> int_q;          // w(x) = int_x^inf q
};

/// Cached F_beta on a grid. Immutable after construction.
struct TracyWidomTable {
    int beta = 2;
    std::vector<double> grid;
    std::vector<double> q_values;
    std::vector<double> cdf_values;
    std::vector<double> survival_values;  // 1 - F, kept separately for relative accuracy near the upper end
    std::vector<double> pdf_values;
    std::vector<double> pdf_slope;  // d f_beta / ds, used for Hermite interpolation

    double x_min() const { return grid.front(); }
    double x_max() const { return grid.back(); }
};

inline void check_beta(int beta) {
    if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2, got " + std::to_string(beta));
}

/// Closed-form upper-tail approximation
/// (1/(16 pi))^{beta/2} s^{-3 beta/4} exp(-(2 beta/3) s^{3/2}), s > 0.
inline double tw_tail_upper(double s, int beta) {
    check_beta(beta);
    if (!(s > 0.0)) throw DomainError("tw_tail_upper requires s > 0");
    return std::pow(1.0 / (16.0 * std::numbers::pi), beta / 2.0) * std::pow(s, -0.75 * beta) *
           std::exp(-2.0 * beta / 3.0 * s * std::sqrt(s));
}

/// Closed-form lower-tail approximation exp(-(beta/24) |s|^3), s < 0.
inline double tw_tail_lower(double s, int beta) {
    check_beta(beta);
    if (!(s < 0.0)) throw DomainError("tw_tail_lower requires s < 0");
    return std::exp(-beta / 24.0 * std::abs(s * s * s));
}

namespace detail {

using PainleveState = std::array<double, 5>;  // q, q', u, v, w

inline PainleveState painleve_rhs(double x, const PainleveState& y) {
    const double q = y[0];
    return {y[1], x * q + 2.0 * q * q * q, -q * q, -y[2], -q};
}

// One Dormand-Prince 5(4) step of (signed) size h. Returns the 5th-order
// solution and writes the embedded error estimate.
inline PainleveState dormand_prince_step(double x, const PainleveState& y, double h, PainleveState& err) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto comb = [&](std::initializer_list<std::pair<double, const PainleveState*>> terms) {
        PainleveState out = y;
        for (auto [coef, k] : terms)
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * coef * (*k)[i];
        return out;
    };
    const PainleveState k1 = painleve_rhs(x, y);
    const PainleveState k2 = painleve_rhs(x + c2 * h, comb({{a21, &k1}}));
    const PainleveState k3 = painleve_rhs(x + c3 * h, comb({{a31, &k1}, {a32, &k2}}));
    const PainleveState k4 = painleve_rhs(x + c4 * h, comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const PainleveState k5 = painleve_rhs(x + c5 * h, comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const PainleveState k6 =
        painleve_rhs(x + h, comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const PainleveState y5 = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const PainleveState k7 = painleve_rhs(x + h, y5);
    for (std::size_t i = 0; i < err.size(); ++i) {
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    return y5;
}

// int_x^inf Ai(t) dt by 16-point Gauss-Legendre panels; Ai has decayed
// below 1e-300 well before x + 40.
inline double airy_tail_integral(double x) {
    static constexpr std::array<double, 8> nodes = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                                    0.9445750230732326, 0.9894009349916499};
    static constexpr std::array<double, 8> weights = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                                      0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                                      0.0622535239386479, 0.0271524594117541};
    constexpr double panel = 0.25;
    double total = 0.0;
    for (double a = x; a < x + 40.0; a += panel) {
        const double mid = a + 0.5 * panel, half = 0.5 * panel;
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            s += weights[i] * (airy_ai(mid - half * nodes[i]) + airy_ai(mid + half * nodes[i]));
        }
        total += half * s;
        if (s * half < 1e-30 * total) break;
    }
    return total;
}

}  // namespace detail

namespace detail {

enum class ShotOutcome { ok, fell, blew_up };

struct Shot {
    ShotOutcome outcome = ShotOutcome::ok;
    std::string message;
    PainleveSolution solution;
};

// Integrates q'' = x q + 2 q^3 leftward from kappa * (Ai, Ai') at x_max.
inline Shot shoot_painleve(double kappa, double x_min, double x_max, double tolerance, double grid_step) {
    const auto cells = static_cast<std::size_t>(std::llround((x_max - x_min) / grid_step));
    const double spacing = (x_max - x_min) / static_cast<double>(cells);

    const double ai = kappa * airy_ai(x_max), aip = kappa * airy_ai_prime(x_max);
    PainleveState y = {ai,
                       aip,
                       aip * aip - x_max * ai * ai,
                       (2.0 * x_max * x_max * ai * ai - 2.0 * x_max * aip * aip - ai * aip) / 3.0,
                       kappa * airy_tail_integral(x_max)};

    Shot shot;
    PainleveSolution& sol = shot.solution;
    const std::size_t points = cells + 1;
    for (auto* v : {&sol.x, &sol.q, &sol.dq, &sol.int_q2, &sol.int_shifted_q2, &sol.int_q}) v->resize(points);
    auto store = [&](std::size_t idx, double x) {
        sol.x[idx] = x;
        sol.q[idx] = y[0];
        sol.dq[idx] = y[1];
        sol.int_q2[idx] = y[2];
        sol.int_shifted_q2[idx] = y[3];
        sol.int_q[idx] = y[4];
    };
    store(cells, x_max);

    double h = -spacing;
    for (std::size_t idx = cells; idx-- > 0;) {
        const double x_from = x_max - static_cast<double>(cells - idx - 1) * spacing;
        const double x_to = idx == 0 ? x_min : x_max - static_cast<double>(cells - idx) * spacing;
        double x = x_from;
        int steps = 0;
        while (x > x_to) {
            if (++steps > 100000) throw IntegrationError("Painleve II step size underflow near x = " + std::to_string(x));
            const bool last = x + h <= x_to;
            const double step = last ? x_to - x : h;
            PainleveState err{};
            const PainleveState trial = dormand_prince_step(x, y, step, err);
            double norm = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                // Relative control: q is ~1e-8 at the right end of the interval.
                const double scale = tolerance * std::max(std::abs(y[i]), std::abs(trial[i])) + 1e-300;
                norm = std::max(norm, std::abs(err[i]) / scale);
            }
            if (norm <= 1.0) {
                x = last ? x_to : x + step;
                y = trial;
            }
            const double factor = norm > 0.0 ? std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0) : 5.0;
            h = std::max(step * factor, -spacing);
        }
        if (!std::isfinite(y[0]) || (x_to < 0.0 && y[0] > std::sqrt(-x_to / 2.0) + 0.5)) {
            shot.outcome = ShotOutcome::blew_up;
            shot.message = "Hastings-McLeod solution blew up at x = " + std::to_string(x_to);
            return shot;
        }
        if (!(y[0] > 0.0) || !(y[0] > sol.q[idx + 1])) {
            shot.outcome = ShotOutcome::fell;
            shot.message = "Hastings-McLeod solution not decreasing at x = " + std::to_string(x_to);
            return shot;
        }
        store(idx, x_to);
    }
    return shot;
}

}  // namespace detail

/// Hastings-McLeod solution on [x_min, x_max], integrated backward from
/// Ai at x_max and sampled at uniform spacing `grid_step`. Steps are adaptive
/// inside each grid cell with relative tolerance `tolerance`. The separatrix
/// is unstable to the left, so if the trajectory leaves it the Airy amplitude
/// is corrected by bisection within 100 * tolerance of 1.
///
/// Throws IntegrationError when no amplitude in that window keeps q positive,
/// decreasing and bounded over the interval.
inline PainleveSolution solve_hastings_mcleod(double x_min = -10.0, double x_max = 8.0, double tolerance = 1e-14,
                                              double grid_step = 0.005) {
    if (!(x_max >= 6.0) || !(x_min <= -8.0)) {
        throw DomainError("solve_hastings_mcleod requires x_min <= -8 and x_max >= 6");
    }
    if (!(tolerance > 0.0) || !(grid_step > 0.0)) throw DomainError("tolerance and grid_step must be positive");

    auto shot = detail::shoot_painleve(1.0, x_min, x_max, tolerance, grid_step);
    if (shot.outcome == detail::ShotOutcome::ok) return std::move(shot.solution);

    // Rounding pushes the trajectory off the separatrix; correct the amplitude
    // within a window that shrinks with the tolerance.
    // A trajectory that falls needs a larger amplitude, one that blows up a smaller one.
    const double width = 100.0 * tolerance;
    const bool fell = shot.outcome == detail::ShotOutcome::fell;
    double lo = fell ? 1.0 : 1.0 - width;
    double hi = fell ? 1.0 + width : 1.0;
    auto bound = detail::shoot_painleve(fell ? hi : lo, x_min, x_max, tolerance, grid_step);
    if (bound.outcome == detail::ShotOutcome::ok) return std::move(bound.solution);
    if (bound.outcome == shot.outcome) throw IntegrationError(shot.message);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        auto trial = detail::shoot_painleve(mid, x_min, x_max, tolerance, grid_step);
        if (trial.outcome == detail::ShotOutcome::ok) return std::move(trial.solution);
        (trial.outcome == detail::ShotOutcome::fell ? lo : hi) = mid;
        shot = std::move(trial);
    }
    throw IntegrationError(shot.message);
}

/// Assemble F_beta, f_beta and df_beta/ds from a Painleve solution.
inline TracyWidomTable build_cdf(const PainleveSolution& sol, int beta) {
    check_beta(beta);
    TracyWidomTable t;
    t.beta = beta;
    t.grid = sol.x;
    t.q_values = sol.q;
    const std::size_t m = sol.x.size();
    t.cdf_values.resize(m);
    t.survival_values.resize(m);
    t.pdf_values.resize(m);
    t.pdf_slope.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double q = sol.q[k], dq = sol.dq[k], u = sol.int_q2[k], v = sol.int_shifted_q2[k], w = sol.int_q[k];
        if (beta == 2) {
            const double F = std::exp(-v);
            t.cdf_values[k] = F;
            t.survival_values[k] = -std::expm1(-v);
            t.pdf_values[k] = F * u;
            t.pdf_slope[k] = F * (u * u - q * q);
        } else {
            const double F = std::exp(-0.5 * (v + w));
            const double g = 0.5 * (q + u);
            t.cdf_values[k] = F;
            t.survival_values[k] = -std::expm1(-0.5 * (v + w));
            t.pdf_values[k] = F * g;
            t.pdf_slope[k] = F * (g * g + 0.5 * (dq - q * q));
        }
    }
    return t;
}

namespace detail {

// Tails are scaled to match the table at its end points so that the
// resulting distribution function stays continuous and monotone.
inline double upper_tail_mass(const TracyWidomTable& t, double s) {
    const double edge = t.survival_values.back();
    return edge * tw_tail_upper(s, t.beta) / tw_tail_upper(t.x_max(), t.beta);
}

inline double lower_tail_mass(const TracyWidomTable& t, double s) {
    return t.cdf_values.front() * tw_tail_lower(s, t.beta) / tw_tail_lower(t.x_min(), t.beta);
}

template <class Value, class Slope>
double hermite(const TracyWidomTable& t, double s, Value value, Slope slope) {
    const double spacing = (t.x_max() - t.x_min()) / static_cast<double>(t.grid.size() - 1);
    auto k = static_cast<std::size_t>((s - t.x_min()) / spacing);
    k = std::min(k, t.grid.size() - 2);
    const double h = t.grid[k + 1] - t.grid[k];
    const double u = (s - t.grid[k]) / h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * value(k) + (u3 - 2 * u2 + u) * h * slope(k) + (-2 * u3 + 3 * u2) * value(k + 1) +
           (u3 - u2) * h * slope(k + 1);
}

}  // namespace detail

/// F_beta(s). Cubic Hermite interpolation on the grid, scaled closed-form
/// tails outside it.
inline double tw_cdf(const TracyWidomTable& t, double s) {
    if (std::isnan(s)) return s;
    if (s >= t.x_max()) return s == std::numeric_limits<double>::infinity() ? 1.0 : 1.0 - detail::upper_tail_mass(t, s);
    if (s <= t.x_min()) return s == -std::numeric_limits<double>::infinity() ? 0.0 : detail::lower_tail_mass(t, s);
    const double v = detail::hermite(
        t, s, [&](std::size_t k) { return t.cdf_values[k]; }, [&](std::size_t k) { return t.pdf_values[k]; });
    return std::clamp(v, 0.0, 1.0);
}

/// 1 - F_beta(s), without cancellation in the far upper tail.
inline double tw_survival(const TracyWidomTable& t, double s) {
    if (std::isnan(s)) return s;
    if (s >= t.x_max()) return s == std::numeric_limits<double>::infinity() ? 0.0 : detail::upper_tail_mass(t, s);
    if (s <= t.x_min()) return 1.0 - tw_cdf(t, s);
    const double v = detail::hermite(
        t, s, [&](std::size_t k) { return t.survival_values[k]; }, [&](std::size_t k) { return -t.pdf_values[k]; });
    return std::clamp(v, 0.0, 1.0);
}

/// Density f_beta(s).
inline double tw_pdf(const TracyWidomTable& t, double s) {
    if (!std::isfinite(s)) return 0.0;
    if (s >= t.x_max()) {
        return detail::upper_tail_mass(t, s) * (0.75 * t.beta / s + t.beta * std::sqrt(s));
    }
    if (s <= t.x_min()) return detail::lower_tail_mass(t, s) * t.beta * s * s / 8.0;
    const double v = detail::hermite(
        t, s, [&](std::size_t k) { return t.pdf_values[k]; }, [&](std::size_t k) { return t.pdf_slope[k]; });
    return std::max(v, 0.0);
}

/// F_beta^{-1}(p) by bisection to 1e-9 (absolute, in s).
inline double tw_quantile(const TracyWidomTable& t, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tw_quantile: p must lie in (0, 1), got " + std::to_string(p));
    double lo = -12.0, hi = 12.0;
    for (int i = 0; i < 60 && tw_cdf(t, lo) > p; ++i) lo *= 1.5;
    for (int i = 0; i < 60 && tw_cdf(t, hi) < p; ++i) hi *= 1.5;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (tw_cdf(t, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Upper quantile: s with 1 - F_beta(s) = alpha, accurate for tiny alpha.
inline double tw_survival_quantile(const TracyWidomTable& t, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("tw_survival_quantile: alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    if (alpha > 1e-3) return tw_quantile(t, 1.0 - alpha);
    double lo = 0.0, hi = 12.0;
    for (int i = 0; i < 60 && tw_survival(t, hi) > alpha; ++i) hi *= 1.5;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (tw_survival(t, mid) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Shared tables for beta = 1 and 2, built on first use.
inline const TracyWidomTable& tracy_widom_table(int beta) {
    check_beta(beta);
    struct Tables {
        TracyWidomTable real, complex;
        Tables() {
            const PainleveSolution sol = solve_hastings_mcleod();
            real = build_cdf(sol, 1);
            complex = build_cdf(sol, 2);
        }
    };
    static const Tables tables;
    return beta == 1 ? tables.real : tables.complex;
}

}  // namespace rankest
