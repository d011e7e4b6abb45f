#pragma once

// Direction-of-arrival simulation: uniform linear array steering vectors,
// circular complex Gaussian sources switching on and off, windowed tracking
// with the minimax and fixed-false-alarm rank estimators, and a sweep over
// snapshot sampling rates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rankest/error.hpp"
#include "rankest/linalg.hpp"
#include "rankest/rank_select.hpp"
#include "rankest/rmt_model.hpp"

namespace rankest {

/// One source: active on [t_on, t_off), direction omega(t) piecewise linear
/// through `omega_path` (held constant outside the breakpoints).
struct SignalEvent {
    double t_on = 0.0;
    double t_off = 0.0;
    double snr_db = 0.0;                                 // 10 log10(|C_0|^2 / sigma^2)
    std::vector<std::pair<double, double>> omega_path;  // (t, omega), t ascending

    bool active(double t) const { return t >= t_on && t < t_off; }

    double omega(double t) const {
        const auto& p = omega_path;
        if (t <= p.front().first) return p.front().second;
        if (t >= p.back().first) return p.back().second;
        auto it = std::upper_bound(p.begin(), p.end(), t, [](double x, const auto& b) { return x < b.first; });
        const auto& [t1, w1] = *it;
        const auto& [t0, w0] = *(it - 1);
        return w0 + (w1 - w0) * (t - t0) / (t1 - t0);
    }

    /// |C_0|^2 for noise power sigma2.
    double power(double sigma2) const { return sigma2 * std::pow(10.0, snr_db / 10.0); }

    void validate() const {
        if (!(t_on < t_off)) throw DomainError("signal: t_on must be less than t_off");
        if (!std::isfinite(snr_db)) throw DomainError("signal: snr_db must be finite");
        if (omega_path.empty()) throw DomainError("signal: omega path needs at least one breakpoint");
        for (std::size_t i = 0; i < omega_path.size(); ++i) {
            const double w = omega_path[i].second;
            if (!(w >= 0.0 && w < 2.0 * std::numbers::pi)) throw DomainError("signal: omega must lie in [0, 2 pi)");
            if (i > 0 && !(omega_path[i].first > omega_path[i - 1].first)) {
                throw DomainError("signal: omega path times must be strictly increasing");
            }
        }
    }
};

struct Scenario {
    std::size_t n = 9;
    double horizon = 1000.0;
    double sampling_rate = 1.0;  // snapshots per unit time
    std::size_t window = 45;
    double sigma2 = 1.0;
    std::uint64_t seed = 1;
    std::vector<SignalEvent> events;

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon * sampling_rate)); }
    double time_of(std::size_t k) const { return static_cast<double>(k) / sampling_rate; }

    void validate() const {
        if (n == 0) throw DomainError("scenario: n must be at least 1");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("scenario: horizon must be positive");
        if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate)) {
            throw DomainError("scenario: sampling_rate must be positive");
        }
        if (window == 0) throw DomainError("scenario: window must be at least 1");
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("scenario: sigma2 must be positive");
        if (steps() == 0) throw DomainError("scenario: horizon * sampling_rate gives no snapshots");
        for (const auto& e : events) e.validate();
    }
};

/// (1, e^{j omega}, ..., e^{j (n-1) omega}), norm sqrt(n).
inline std::vector<Complex> steering_vector(double omega, std::size_t n) {
    if (n == 0) throw DomainError("steering_vector: n must be at least 1");
    std::vector<Complex> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = std::polar(1.0, omega * static_cast<double>(k));
    return a;
}

/// x(t) = sum_i s_i a(omega_i(t)) + noise, with s_i ~ CN(0, |C_0,i|^2) and
/// noise ~ CN(0, sigma^2 I).
template <class Rng>
Snapshot generate_snapshot(const Scenario& sc, long time_index, Rng& rng) {
    const double t = static_cast<double>(time_index) / sc.sampling_rate;
    std::normal_distribution<double> normal(0.0, 1.0);
    Snapshot s{time_index, std::vector<Complex>(sc.n)};
    for (const auto& e : sc.events) {
        if (!e.active(t)) continue;
        const double amp = std::sqrt(0.5 * e.power(sc.sigma2));
        const Complex src(amp * normal(rng), amp * normal(rng));
        const auto a = steering_vector(e.omega(t), sc.n);
        for (std::size_t k = 0; k < sc.n; ++k) s.values[k] += src * a[k];
    }
    const double noise = std::sqrt(0.5 * sc.sigma2);
    for (auto& v : s.values) v += Complex(noise * normal(rng), noise * normal(rng));
    return s;
}

/// A C_S A^* for the events active at time t.
inline Matrix signal_covariance(const Scenario& sc, double t) {
    Matrix c(sc.n, sc.n);
    for (const auto& e : sc.events) {
        if (!e.active(t)) continue;
        const auto a = steering_vector(e.omega(t), sc.n);
        const double p = e.power(sc.sigma2);
        for (std::size_t i = 0; i < sc.n; ++i)
            for (std::size_t j = 0; j < sc.n; ++j) c(i, j) += p * a[i] * std::conj(a[j]);
    }
    return c;
}

/// A C_S A^* + sigma^2 I.
inline Matrix population_covariance(const Scenario& sc, double t) {
    Matrix c = signal_covariance(sc, t);
    for (std::size_t i = 0; i < sc.n; ++i) c(i, i) += sc.sigma2;
    return c;
}

struct TrueSubspace {
    std::size_t rank = 0;
    Matrix basis;                 // n x rank, orthonormal
    std::vector<double> spikes;   // leading eigenvalues of A C_S A^*
};

/// Rank = number of active events (capped at n); basis = principal
/// eigenvectors of the analytic signal covariance.
inline TrueSubspace true_subspace(const Scenario& sc, double t) {
    std::size_t r = 0;
    for (const auto& e : sc.events) r += e.active(t) ? 1 : 0;
    r = std::min(r, sc.n);
    TrueSubspace ts;
    ts.rank = r;
    if (r == 0) {
        ts.basis = Matrix(sc.n, 0);
        return ts;
    }
    const auto eig = hermitian_eig(signal_covariance(sc, t));
    ts.basis = eig.vectors.leading_columns(r);
    ts.spikes.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(r));
    return ts;
}

struct TrackingRecord {
    double time = 0.0;
    std::size_t r = 0;
    std::size_t rhat_mm = 0;
    std::size_t rhat_kn = 0;
    double sigma2_hat = std::numeric_limits<double>::quiet_NaN();  // NaN until the window fills
    double err_r = 0.0;
    double err_rhat_mm = 0.0;
    double err_rhat_kn = 0.0;
    bool estimated = false;         // window full, estimators ran
    bool subcritical_active = false;  // some true spike <= sqrt(gamma) sigma^2
};

struct TrackingTrace {
    std::vector<TrackingRecord> records;
};

struct TrackingOptions {
    double kn_false_alarm = 0.005;
    double relative_lambda0 = std::numeric_limits<double>::quiet_NaN();  // lambda_0 / sigma^2; NaN = default
};

/// Streams the scenario through a window of N snapshots. Before the window
/// fills both estimates are 0 and sigma2_hat is NaN. The first full window
/// uses the mean of all eigenvalues as sigma^2; later steps use the residual
/// mean with the previous step's estimate (each estimator keeps its own).
inline TrackingTrace run_tracking(const Scenario& sc, const CostSchedule& costs, const TrackingOptions& opt = {}) {
    sc.validate();
    if (costs.c_exclusion.size() != sc.n) throw DimensionError("run_tracking: cost schedule length must equal n");
    const NoiseModel unit(sc.n, sc.window, 1.0, Field::complex);
    const double rel_lambda0 = std::isnan(opt.relative_lambda0) ? default_lambda0(unit) : opt.relative_lambda0;
    const ThresholdCache cache(sc.n, sc.window, Field::complex, costs, rel_lambda0);
    const double critical = NoiseModel(sc.n, sc.window, sc.sigma2).critical_strength();

    std::mt19937_64 rng(sc.seed);
    SnapshotWindow window(sc.window, sc.n, Field::complex);
    TrackingTrace trace;
    trace.records.reserve(sc.steps());
    std::size_t prev_mm = 0, prev_kn = 0;
    double sigma2_kn = 0.0;
    bool started = false;

    for (std::size_t k = 0; k < sc.steps(); ++k) {
        const double t = sc.time_of(k);
        window.push(generate_snapshot(sc, static_cast<long>(k), rng));
        const auto truth = true_subspace(sc, t);
        const auto eig = hermitian_eig(sample_covariance(window));

        TrackingRecord rec;
        rec.time = t;
        rec.r = truth.rank;
        for (double s : truth.spikes) rec.subcritical_active = rec.subcritical_active || !(s > critical);
        if (window.full()) {
            rec.estimated = true;
            if (!started) {
                rec.sigma2_hat = sigma2_kn = estimate_noise_variance(eig, 0);
                started = true;
            } else {
                rec.sigma2_hat = estimate_noise_variance(eig, std::min(prev_mm, sc.n - 1));
                sigma2_kn = estimate_noise_variance(eig, std::min(prev_kn, sc.n - 1));
            }
            rec.rhat_mm = estimate_rank(eig, cache.at(rec.sigma2_hat)).rank;
            rec.rhat_kn = kn_estimate_rank(eig, unit.with_sigma2(sigma2_kn), opt.kn_false_alarm).rank;
            prev_mm = rec.rhat_mm;
            prev_kn = rec.rhat_kn;
        }
        rec.err_r = subspace_error(truth.basis, eig.vectors.leading_columns(truth.rank));
        rec.err_rhat_mm = subspace_error(truth.basis, eig.vectors.leading_columns(rec.rhat_mm));
        rec.err_rhat_kn = subspace_error(truth.basis, eig.vectors.leading_columns(rec.rhat_kn));
        trace.records.push_back(rec);
    }
    return trace;
}

enum class Estimator { minimax, kn };

/// Mean of |r - r_hat| over the steps where the estimators ran.
inline double rank_error(const TrackingTrace& trace, Estimator which) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& rec : trace.records) {
        if (!rec.estimated) continue;
        const auto rhat = which == Estimator::minimax ? rec.rhat_mm : rec.rhat_kn;
        sum += std::abs(static_cast<double>(rec.r) - static_cast<double>(rhat));
        ++count;
    }
    if (count == 0) throw DomainError("rank_error: no estimated steps in the trace");
    return sum / static_cast<double>(count);
}

struct SweepRow {
    double rate;
    double mm_mean, mm_sd;
    double kn_mean, kn_sd;
};

/// Scenario at a new sampling rate. The window keeps its time span, so N
/// scales with the rate relative to the scenario's own rate.
inline Scenario at_sampling_rate(const Scenario& sc, double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("sampling rate must be positive");
    Scenario out = sc;
    out.sampling_rate = rate;
    out.window = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(static_cast<double>(sc.window) * rate / sc.sampling_rate)));
    return out;
}

/// Seed for one replicate; distinct across (rate index, replicate).
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t rate_index, std::size_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(rate_index), static_cast<std::uint32_t>(replicate)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline double sample_sd(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Rank error of both estimators, mean and sample sd over replicates, per rate.
inline std::vector<SweepRow> sweep_sampling_rate(const Scenario& sc, const std::vector<double>& rates,
                                                 std::size_t replicates, const CostSchedule& costs,
                                                 const TrackingOptions& opt = {}) {
    if (rates.empty()) throw DomainError("sweep: no rates given");
    if (replicates == 0) throw DomainError("sweep: replicates must be at least 1");
    std::vector<SweepRow> rows;
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        Scenario s = at_sampling_rate(sc, rates[ri]);
        std::vector<double> mm, kn;
        for (std::size_t rep = 0; rep < replicates; ++rep) {
            s.seed = replicate_seed(sc.seed, ri, rep);
            const auto trace = run_tracking(s, costs, opt);
            mm.push_back(rank_error(trace, Estimator::minimax));
            kn.push_back(rank_error(trace, Estimator::kn));
        }
        auto mean = [](const std::vector<double>& x) {
            double m = 0.0;
            for (double v : x) m += v;
            return m / static_cast<double>(x.size());
        };
        rows.push_back({rates[ri], mean(mm), sample_sd(mm), mean(kn), sample_sd(kn)});
    }
    return rows;
}

}  // namespace rankest
