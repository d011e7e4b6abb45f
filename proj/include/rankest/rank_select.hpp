#pragma once

// Sequential minimax rank selection: test ell_1 > T(1), ell_2 > T(2), ...
// and stop at the first failure. T(i) is the minimax threshold for costs
// (c_I, C_E(i)) with C_E(j) = sum_{i >= j} c_E(i). Also the fixed false-alarm
// Tracy-Widom baseline and the residual noise-variance estimate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rankest/error.hpp"
#include "rankest/linalg.hpp"
#include "rankest/minimax_threshold.hpp"
#include "rankest/rmt_model.hpp"
#include "rankest/tracy_widom.hpp"

namespace rankest {

/// Inclusion cost and per-index exclusion costs c_E(1..n).
struct CostSchedule {
    double c_inclusion = 1.0;
    std::vector<double> c_exclusion;

    /// c_I = c_E(i) = cost for every i.
    static CostSchedule equal(std::size_t n, double cost = 1.0) { return {cost, std::vector<double>(n, cost)}; }

    /// Equal costs up to r_max, zero exclusion cost beyond (caps the rank).
    static CostSchedule capped(std::size_t n, std::size_t r_max, double cost = 1.0) {
        CostSchedule s = equal(n, cost);
        for (std::size_t i = r_max; i < n; ++i) s.c_exclusion[i] = 0.0;
        return s;
    }

    void validate() const {
        if (!(c_inclusion > 0.0) || !std::isfinite(c_inclusion)) throw DomainError("inclusion cost must be positive");
        if (c_exclusion.empty()) throw DomainError("exclusion cost sequence is empty");
        bool any = false;
        for (double c : c_exclusion) {
            if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("exclusion costs must be finite and nonnegative");
            any = any || c > 0.0;
        }
        if (!any) throw DomainError("at least one exclusion cost must be positive");
    }
};

/// Suffix sums C_E(j) = sum_{i=j}^{n} c_E(i), j = 1..n (0-based in the result).
inline std::vector<double> cumulative_exclusion_costs(const CostSchedule& s) {
    s.validate();
    std::vector<double> out(s.c_exclusion.size());
    double acc = 0.0;
    for (std::size_t j = out.size(); j-- > 0;) {
        acc += s.c_exclusion[j];
        out[j] = acc;
    }
    return out;
}

/// T(1..n); +inf where C_E(i) = 0 so that index is never included.
struct ThresholdSequence {
    std::vector<double> thresholds;
    NoiseModel noise;
    double lambda0;
    CostSchedule costs;

    std::size_t size() const { return thresholds.size(); }
    double operator[](std::size_t i) const { return thresholds[i]; }
};

/// lambda_0 = sigma^2 (sqrt(gamma) + N^{-1/3}).
inline double default_lambda0(const NoiseModel& noise) {
    return noise.sigma2() * (std::sqrt(noise.gamma()) + std::cbrt(1.0 / static_cast<double>(noise.window())));
}

inline ThresholdSequence build_threshold_sequence(const NoiseModel& noise, double lambda0, const CostSchedule& costs) {
    const auto cumulative = cumulative_exclusion_costs(costs);
    ThresholdSequence seq{std::vector<double>(cumulative.size()), noise, lambda0, costs};
    std::map<double, double> solved;  // C_E -> T
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
        const double ce = cumulative[i];
        if (ce == 0.0) {
            seq.thresholds[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        auto it = solved.find(ce);
        if (it == solved.end()) {
            it = solved.emplace(ce, solve_minimax_threshold({noise, lambda0, costs.c_inclusion, ce}).threshold).first;
        }
        seq.thresholds[i] = it->second;
    }
    return seq;
}

struct RankEstimate {
    std::size_t rank = 0;
    std::vector<bool> exceeds;       // ell_i > T(i), for every i
    std::vector<double> eigenvalues;
};

/// Sequential test over descending eigenvalues against per-index
/// thresholds; the first index that fails stops the scan.
inline RankEstimate estimate_rank(std::span<const double> eigenvalues, std::span<const double> thresholds) {
    if (thresholds.size() < eigenvalues.size()) {
        throw DimensionError("estimate_rank: fewer thresholds than eigenvalues");
    }
    RankEstimate est;
    est.eigenvalues.assign(eigenvalues.begin(), eigenvalues.end());
    est.exceeds.resize(eigenvalues.size());
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) est.exceeds[i] = eigenvalues[i] > thresholds[i];
    while (est.rank < eigenvalues.size() && est.exceeds[est.rank]) ++est.rank;
    return est;
}

inline RankEstimate estimate_rank(const EigenSystem& eig, const ThresholdSequence& seq) {
    return estimate_rank(eig.values, seq.thresholds);
}

/// Mean of the n - r_prev smallest eigenvalues.
inline double estimate_noise_variance(std::span<const double> eigenvalues, std::size_t r_prev) {
    if (r_prev >= eigenvalues.size()) {
        throw DomainError("estimate_noise_variance: r_prev = " + std::to_string(r_prev) + " leaves no noise eigenvalues");
    }
    const double sum = std::accumulate(eigenvalues.begin() + static_cast<std::ptrdiff_t>(r_prev), eigenvalues.end(), 0.0);
    return sum / static_cast<double>(eigenvalues.size() - r_prev);
}

inline double estimate_noise_variance(const EigenSystem& eig, std::size_t r_prev) {
    return estimate_noise_variance(eig.values, r_prev);
}

/// Single threshold mu + sd F_beta^{-1}(1 - false_alarm).
inline double kn_threshold(const NoiseModel& noise, double false_alarm) {
    if (!(false_alarm > 0.0 && false_alarm < 1.0)) throw DomainError("false alarm rate must lie in (0, 1)");
    const auto z = null_standardization(noise);
    return z.unstandardize(tw_survival_quantile(tracy_widom_table(noise.beta()), false_alarm));
}

/// Fixed false-alarm baseline with the same sequential stopping rule.
inline RankEstimate kn_estimate_rank(std::span<const double> eigenvalues, const NoiseModel& noise, double false_alarm) {
    const std::vector<double> thresholds(eigenvalues.size(), kn_threshold(noise, false_alarm));
    return estimate_rank(eigenvalues, thresholds);
}

inline RankEstimate kn_estimate_rank(const EigenSystem& eig, const NoiseModel& noise, double false_alarm) {
    return kn_estimate_rank(eig.values, noise, false_alarm);
}

/// Threshold sequences for a fixed (n, N, beta), costs and relative minimal
/// strength lambda_0 / sigma^2. Every threshold is homogeneous of degree one
/// in sigma^2, so the sequence is solved once at sigma^2 = 1 and rescaled.
class ThresholdCache {
public:
    ThresholdCache(std::size_t n, std::size_t window, Field field, CostSchedule costs, double relative_lambda0)
        : unit_(build_threshold_sequence(NoiseModel(n, window, 1.0, field), relative_lambda0, costs)) {}

    ThresholdSequence at(double sigma2) const {
        ThresholdSequence seq = unit_;
        seq.noise = unit_.noise.with_sigma2(sigma2);
        seq.lambda0 = unit_.lambda0 * sigma2;
        for (double& t : seq.thresholds) t *= sigma2;
        return seq;
    }

    const ThresholdSequence& unit() const { return unit_; }

private:
    ThresholdSequence unit_;
};

}  // namespace rankest
