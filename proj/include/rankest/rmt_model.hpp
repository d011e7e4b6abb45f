#pragma once

// Finite-(n, N) standardizations for the largest sample eigenvalue under the
// white-noise null and the spiked alternative, the sqrt(gamma) sigma^2 phase
// transition, eigenvector overlap and the asymptotic risk of a threshold rule.

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "rankest/error.hpp"
#include "rankest/linalg.hpp"
#include "rankest/specfun.hpp"
#include "rankest/tracy_widom.hpp"

namespace rankest {

/// White-noise model: dimension n, window length N, noise variance sigma2.
/// gamma is the exact finite ratio n / N.
class NoiseModel {
public:
    NoiseModel(std::size_t n, std::size_t window, double sigma2, Field field = Field::complex)
        : n_(n), window_(window), sigma2_(sigma2), field_(field) {
        if (n == 0 || window == 0) throw DomainError("NoiseModel: n and N must be at least 1");
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("NoiseModel: sigma2 must be positive");
    }

    std::size_t n() const { return n_; }
    std::size_t window() const { return window_; }
    double sigma2() const { return sigma2_; }
    Field field() const { return field_; }
    int beta() const { return beta_of(field_); }
    double gamma() const { return static_cast<double>(n_) / static_cast<double>(window_); }

    NoiseModel with_sigma2(double sigma2) const { return {n_, window_, sigma2, field_}; }

    /// sqrt(gamma) sigma^2, the detection limit for a spike.
    double critical_strength() const { return std::sqrt(gamma()) * sigma2_; }

private:
    std::size_t n_;
    std::size_t window_;
    double sigma2_;
    Field field_;
};

/// Noise model plus strictly descending positive spikes lambda_1 > ... > lambda_r.
class SpikedModel {
public:
    SpikedModel(NoiseModel noise, std::vector<double> lambdas) : noise_(noise), lambdas_(std::move(lambdas)) {
        if (lambdas_.size() >= noise_.n()) throw DomainError("SpikedModel: need fewer spikes than dimensions");
        for (std::size_t i = 0; i < lambdas_.size(); ++i) {
            if (!(lambdas_[i] > 0.0)) throw DomainError("SpikedModel: spikes must be positive");
            if (i > 0 && !(lambdas_[i] < lambdas_[i - 1])) {
                throw DomainError("SpikedModel: spikes must be strictly descending");
            }
        }
    }

    const NoiseModel& noise() const { return noise_; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    std::size_t rank() const { return lambdas_.size(); }

    /// Population eigenvalues {lambda_i + sigma^2} followed by n - r copies of sigma^2.
    std::vector<double> population_eigenvalues() const {
        std::vector<double> ev(noise_.n(), noise_.sigma2());
        for (std::size_t i = 0; i < lambdas_.size(); ++i) ev[i] += lambdas_[i];
        return ev;
    }

private:
    NoiseModel noise_;
    std::vector<double> lambdas_;
};

/// Location and scale used to standardize a sample eigenvalue.
struct Standardization {
    double mu;
    double sd;

    double standardize(double x) const { return (x - mu) / sd; }
    double unstandardize(double t) const { return mu + t * sd; }
};

/// mu = (sigma^2/N)(sqrt n + sqrt N)^2,
/// sd = (sigma^2/N)(sqrt n + sqrt N)(1/sqrt n + 1/sqrt N)^{1/3}.
inline Standardization null_standardization(const NoiseModel& m) {
    const double rn = std::sqrt(static_cast<double>(m.n()));
    const double rN = std::sqrt(static_cast<double>(m.window()));
    const double scale = m.sigma2() / static_cast<double>(m.window());
    return {scale * (rn + rN) * (rn + rN), scale * (rn + rN) * std::cbrt(1.0 / rn + 1.0 / rN)};
}

/// True iff lambda > sqrt(gamma) sigma^2 (strict).
inline bool is_detectable(const NoiseModel& m, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("is_detectable: lambda must be nonnegative");
    return lambda > m.critical_strength();
}

/// mu(lambda) = (lambda + sigma^2)(1 + gamma sigma^2 / lambda),
/// sd(lambda) = (lambda + sigma^2) sqrt(2/(beta N) (1 - gamma sigma^4 / lambda^2)).
inline Standardization spiked_standardization(const NoiseModel& m, double lambda) {
    if (!is_detectable(m, lambda)) {
        throw SubcriticalError("spiked_standardization: lambda = " + std::to_string(lambda) +
                               " is not above sqrt(gamma) sigma^2 = " + std::to_string(m.critical_strength()));
    }
    const double s2 = m.sigma2(), g = m.gamma();
    const double mu = (lambda + s2) * (1.0 + g * s2 / lambda);
    const double sd = (lambda + s2) * std::sqrt(2.0 / (m.beta() * static_cast<double>(m.window())) *
                                                (1.0 - g * s2 * s2 / (lambda * lambda)));
    return {mu, sd};
}

/// sigma^2 (1 + sqrt gamma)^2, the almost-sure limit of noise eigenvalues.
inline double bulk_edge(const NoiseModel& m) {
    const double r = 1.0 + std::sqrt(m.gamma());
    return m.sigma2() * r * r;
}

/// Limit of |<w_i, w_hat_i>|: sqrt((lambda - gamma sigma^4/lambda)/(lambda + gamma sigma^2))
/// above the phase transition, 0 otherwise. Proven for real data; for
/// complex data it is used as a diagnostic only.
inline double eigenvector_overlap(const NoiseModel& m, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("eigenvector_overlap: lambda must be positive");
    if (!is_detectable(m, lambda)) return 0.0;
    const double s2 = m.sigma2(), g = m.gamma();
    return std::sqrt((lambda - g * s2 * s2 / lambda) / (lambda + g * s2));
}

/// Hypotheses for a single inclusion test: no signal, or a signal of
/// strength lambda.
struct NullHypothesis {};
struct SignalHypothesis {
    double lambda;
};
using Hypothesis = std::variant<NullHypothesis, SignalHypothesis>;

/// Limiting risk of the rule "include iff ell_1 > T":
/// null:   c_I (1 - F_beta((T - mu)/sd)),
/// signal: c_E Phi((T - mu(lambda))/sd(lambda)).
inline double asymptotic_risk(const NoiseModel& m, const Hypothesis& h, double threshold, double c_inclusion,
                              double c_exclusion) {
    if (std::isnan(threshold)) throw DomainError("asymptotic_risk: threshold is NaN");
    if (!(c_inclusion >= 0.0) || !(c_exclusion >= 0.0)) throw DomainError("asymptotic_risk: costs must be >= 0");
    if (std::holds_alternative<NullHypothesis>(h)) {
        const auto z = null_standardization(m);
        return c_inclusion * tw_survival(tracy_widom_table(m.beta()), z.standardize(threshold));
    }
    const auto z = spiked_standardization(m, std::get<SignalHypothesis>(h).lambda);
    return c_exclusion * std_normal_cdf(z.standardize(threshold));
}

}  // namespace rankest
