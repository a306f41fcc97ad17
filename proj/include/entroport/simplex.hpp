#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"

namespace entroport {

/// A point of the unit simplex: nonnegative weights summing to one.
///
/// Construction renormalizes when the raw sum is within 1e-9 of one and
/// rejects otherwise, so weights read from files stay usable without
/// silently accepting garbage. Instances are immutable.
class SimplexVector {
public:
    explicit SimplexVector(std::vector<double> weights) : w_(std::move(weights)) {
        if (w_.empty()) throw DataError("simplex vector must have at least one weight");
        double sum = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double x = w_[i];
            if (!std::isfinite(x)) {
                throw DataError("simplex weight " + std::to_string(i) + " is not finite");
            }
            if (x < 0.0) {
                throw DataError("simplex weight " + std::to_string(i) +
                                " is negative (" + std::to_string(x) + ")");
            }
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw DataError("simplex weights sum to " + std::to_string(sum) +
                            ", outside tolerance 1e-9");
        }
        if (sum != 1.0) {
            for (double& x : w_) x /= sum;
        }
    }

    static SimplexVector uniform(std::size_t n) {
        return SimplexVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

    bool strictly_positive() const {
        for (double x : w_)
            if (x <= 0.0) return false;
        return true;
    }

private:
    std::vector<double> w_;
};

inline double l1_distance(const SimplexVector& a, const SimplexVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

/// Nonnegative entropy value with an explicit infinity marker, so the
/// absolute-continuity failure is distinguishable from numeric overflow.
class EntropyValue {
public:
    static EntropyValue finite(double v) { return EntropyValue(v, true); }
    static EntropyValue infinite() { return EntropyValue(0.0, false); }

    bool is_finite() const { return finite_; }

    /// Finite value; throws on the infinite marker.
    double value() const {
        if (!finite_) throw DataError("relative entropy is infinite");
        return v_;
    }

    double value_or_inf() const {
        return finite_ ? v_ : std::numeric_limits<double>::infinity();
    }

private:
    EntropyValue(double v, bool finite) : v_(v), finite_(finite) {}
    double v_;
    bool finite_;
};

/// Relative entropy (KL divergence) of nu with respect to mu,
/// sum_i nu_i log(nu_i / mu_i), with 0 log(0/x) = 0. Infinite exactly when
/// nu puts mass where mu has none.
inline EntropyValue relative_entropy(const SimplexVector& nu, const SimplexVector& mu) {
    if (nu.size() != mu.size()) {
        throw DataError("relative_entropy: dimension mismatch (" +
                        std::to_string(nu.size()) + " vs " + std::to_string(mu.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        if (nu[i] == 0.0) continue;
        if (mu[i] == 0.0) return EntropyValue::infinite();
        sum += nu[i] * std::log(nu[i] / mu[i]);
    }
    // Clamp the rounding cloud around zero; true values are >= 0.
    if (sum < 0.0 && sum > -1e-12) sum = 0.0;
    return EntropyValue::finite(sum);
}

/// Shannon entropy -sum_i pi_i log pi_i, in [0, log n].
inline double shannon_entropy(const SimplexVector& pi) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] > 0.0) sum -= pi[i] * std::log(pi[i]);
    }
    return sum < 0.0 ? 0.0 : sum;
}

/// prod_i mu_i^{pi_i}; equals exp(-H(pi|mu) - H_shannon(pi)).
inline double generating_function_value(const SimplexVector& pi, const SimplexVector& mu) {
    if (pi.size() != mu.size()) {
        throw DataError("generating_function_value: dimension mismatch");
    }
    double log_sum = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (mu[i] == 0.0) {
            throw DataError("generating_function_value: zero market weight at asset " +
                            std::to_string(i));
        }
        if (pi[i] != 0.0) log_sum += pi[i] * std::log(mu[i]);
    }
    return std::exp(log_sum);
}

} // namespace entroport
