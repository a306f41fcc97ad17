#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/ledger.hpp"
#include "entroport/market_path.hpp"
#include "entroport/simplex.hpp"

namespace entroport {

enum class FieldKind {
    gradient,            // steepest increase of H(.|mu)
    functional_gradient, // gradient scaled by a positive transform of H
    flow_in,             // straight line toward a higher-entropy corner
    flow_out,            // straight line away from mu along pi - mu
};

inline std::string to_string(FieldKind k) {
    switch (k) {
        case FieldKind::gradient: return "gradient";
        case FieldKind::functional_gradient: return "functional_gradient";
        case FieldKind::flow_in: return "flow_in";
        case FieldKind::flow_out: return "flow_out";
    }
    return "?";
}

inline FieldKind field_kind_from_string(const std::string& s) {
    if (s == "gradient") return FieldKind::gradient;
    if (s == "functional_gradient") return FieldKind::functional_gradient;
    if (s == "flow_in") return FieldKind::flow_in;
    if (s == "flow_out") return FieldKind::flow_out;
    throw DataError("unknown vector field kind: " + s);
}

/// Entropy-increasing direction field on the simplex. Every built-in obeys:
/// components sum to zero, and the dot product with the relative-entropy
/// gradient is nonnegative at every point.
class VectorField {
public:
    explicit VectorField(FieldKind kind,
                         std::function<double(double)> transform_derivative = {})
        : kind_(kind), transform_derivative_(std::move(transform_derivative)) {
        if (kind_ == FieldKind::functional_gradient && !transform_derivative_) {
            // default transform R(h) = h + h^2/2, so R'(h) = 1 + h
            transform_derivative_ = [](double h) { return 1.0 + h; };
        }
    }

    FieldKind kind() const { return kind_; }

    /// Direction at pi given the reference market weights mu.
    std::vector<double> eval(const SimplexVector& pi, const SimplexVector& mu) const {
        const std::size_t n = pi.size();
        std::vector<double> u(n, 0.0);
        switch (kind_) {
            case FieldKind::gradient:
            case FieldKind::functional_gradient: {
                double mean = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    u[i] = log_ratio(pi[i], mu[i]);
                    mean += u[i];
                }
                mean /= static_cast<double>(n);
                for (double& x : u) x -= mean;
                if (kind_ == FieldKind::functional_gradient) {
                    const double h = relative_entropy(pi, mu).value_or_inf();
                    const double scale = std::isfinite(h) ? transform_derivative_(h) : 1.0;
                    if (scale < 0.0) {
                        throw DataError("functional_gradient: transform derivative must be >= 0");
                    }
                    for (double& x : u) x *= scale;
                }
                break;
            }
            case FieldKind::flow_in: {
                // Corner with the largest log weight ratio. Its relative
                // entropy exceeds the portfolio's, and the straight-line
                // direction has nonnegative dot product with grad H.
                std::size_t best = 0;
                double best_val = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    const double v = log_ratio(pi[i], mu[i]);
                    if (v > best_val + 1e-15) {
                        best_val = v;
                        best = i;
                    }
                }
                for (std::size_t i = 0; i < n; ++i) u[i] = (i == best ? 1.0 : 0.0) - pi[i];
                break;
            }
            case FieldKind::flow_out: {
                // U := 0 at pi == mu; the field is not defined there otherwise.
                for (std::size_t i = 0; i < n; ++i) u[i] = pi[i] - mu[i];
                break;
            }
        }
        return u;
    }

private:
    static double log_ratio(double p, double m) {
        return std::log(std::max(p, 1e-300) / std::max(m, 1e-300));
    }

    FieldKind kind_;
    std::function<double(double)> transform_derivative_;
};

/// Counters reported by the flow integrator; clipped steps are recorded,
/// never silent.
struct FlowStats {
    int clipped_substeps = 0;
    bool budget_stopped = false;
    double entropy_consumed = 0.0;
};

namespace detail {

// Largest fraction of the proposed step that keeps all coordinates >= 0.
// The step sums to zero, so scaling preserves the simplex.
inline double clip_fraction(const std::vector<double>& pi, const std::vector<double>& step) {
    double s = 1.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (step[i] < 0.0 && pi[i] + step[i] < 0.0) {
            s = std::min(s, pi[i] / -step[i]);
        }
    }
    return s;
}

inline std::vector<double> midpoint_substep(const VectorField& field,
                                            const std::vector<double>& pi,
                                            const SimplexVector& mu, double h, double sign,
                                            FlowStats* stats) {
    const SimplexVector pi_sv{std::vector<double>(pi)};
    std::vector<double> k1 = field.eval(pi_sv, mu);
    std::vector<double> half(pi.size());
    std::vector<double> step(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) step[i] = sign * 0.5 * h * k1[i];
    double frac = clip_fraction(pi, step);
    for (std::size_t i = 0; i < pi.size(); ++i) {
        half[i] = std::max(0.0, pi[i] + frac * step[i]);
    }

    const SimplexVector half_sv{std::vector<double>(half)};
    std::vector<double> k2 = field.eval(half_sv, mu);
    for (std::size_t i = 0; i < pi.size(); ++i) step[i] = sign * h * k2[i];
    frac = clip_fraction(pi, step);
    if (frac < 1.0 && stats) stats->clipped_substeps += 1;
    std::vector<double> next(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) {
        next[i] = std::max(0.0, pi[i] + frac * step[i]);
    }
    return next;
}

} // namespace detail

/// Integrate the forward flow pi'(u) = U_mu(pi(u)) for the given duration.
/// Fixed-substep midpoint rule; `substeps_per_unit` controls resolution.
/// The result never leaves the simplex, and relative entropy with respect
/// to mu does not decrease beyond rounding.
inline SimplexVector flow_step(const VectorField& field, const SimplexVector& pi,
                               const SimplexVector& mu_next, double duration,
                               int substeps_per_unit = 64, FlowStats* stats = nullptr) {
    if (duration < 0.0) throw DataError("flow_step: negative duration");
    if (pi.size() != mu_next.size()) throw DataError("flow_step: dimension mismatch");
    if (duration == 0.0) return pi;
    const int n_sub = std::max(1, static_cast<int>(std::ceil(duration * substeps_per_unit)));
    const double h = duration / n_sub;
    std::vector<double> cur = pi.weights();
    for (int k = 0; k < n_sub; ++k) {
        cur = detail::midpoint_substep(field, cur, mu_next, h, +1.0, stats);
    }
    return SimplexVector(std::move(cur));
}

/// Integrate the reverse flow pi'(u) = -U_mu(pi(u)) until `duration` or until
/// the relative-entropy drop from the start exceeds `budget`, whichever is
/// first. The crossing substep is bisected (30 iterations) so the entropy
/// consumed never exceeds budget beyond rounding.
inline SimplexVector reverse_flow_with_budget(const VectorField& field, const SimplexVector& pi,
                                              const SimplexVector& mu_next, double budget,
                                              double duration, int substeps_per_unit = 64,
                                              FlowStats* stats = nullptr) {
    if (budget < 0.0) throw DataError("reverse_flow_with_budget: negative budget");
    if (duration < 0.0) throw DataError("reverse_flow_with_budget: negative duration");
    if (pi.size() != mu_next.size()) {
        throw DataError("reverse_flow_with_budget: dimension mismatch");
    }
    if (budget == 0.0 || duration == 0.0) return pi;
    const double h0 = relative_entropy(pi, mu_next).value_or_inf();
    if (!std::isfinite(h0)) {
        throw DataError("reverse_flow_with_budget: starting entropy is infinite");
    }
    const int n_sub = std::max(1, static_cast<int>(std::ceil(duration * substeps_per_unit)));
    const double h = duration / n_sub;
    std::vector<double> cur = pi.weights();
    double consumed = 0.0;
    for (int k = 0; k < n_sub; ++k) {
        std::vector<double> next = detail::midpoint_substep(field, cur, mu_next, h, -1.0, stats);
        double drop = h0 - relative_entropy(SimplexVector{std::vector<double>(next)}, mu_next)
                               .value_or_inf();
        if (drop > budget) {
            // Bisect the fraction of this substep that lands exactly at the
            // budget; keep the admissible endpoint.
            double lo = 0.0, hi = 1.0;
            std::vector<double> best = cur;
            double best_drop = consumed;
            for (int it = 0; it < 30; ++it) {
                const double mid = 0.5 * (lo + hi);
                std::vector<double> trial =
                    detail::midpoint_substep(field, cur, mu_next, mid * h, -1.0, nullptr);
                const double trial_drop =
                    h0 - relative_entropy(SimplexVector{std::vector<double>(trial)}, mu_next)
                             .value_or_inf();
                if (trial_drop > budget) {
                    hi = mid;
                } else {
                    lo = mid;
                    best = std::move(trial);
                    best_drop = trial_drop;
                }
            }
            if (stats) {
                stats->budget_stopped = true;
                stats->entropy_consumed = best_drop;
            }
            return SimplexVector(std::move(best));
        }
        consumed = drop;
        cur = std::move(next);
    }
    if (stats) stats->entropy_consumed = consumed;
    return SimplexVector(std::move(cur));
}

/// Replicate fixed weights over a horizon.
inline std::vector<SimplexVector> make_constant(const SimplexVector& pi, std::size_t length) {
    return std::vector<SimplexVector>(length, pi);
}

/// The market portfolio: weights follow mu(t).
inline std::vector<SimplexVector> make_market(const MarketPath& path) {
    std::vector<SimplexVector> out;
    out.reserve(path.n_times());
    for (std::size_t t = 0; t < path.n_times(); ++t) out.push_back(path.mu(t));
    return out;
}

/// Rebalance toward the latest market weights, spending at most a `lambda`
/// fraction of the free energy earned in the step just observed. Uses the
/// linearized step size clamped at 1, so pi(t+1) is always a convex
/// combination of pi(t) and mu(t+1); the resulting ledger has
/// nonnegative per-step drift for every lambda in [0,1].
inline std::vector<SimplexVector> run_lambda_strategy(const MarketPath& path, double lambda,
                                                      const SimplexVector& pi0) {
    if (lambda < 0.0 || lambda > 1.0) {
        throw DataError("lambda strategy: lambda must lie in [0,1]");
    }
    if (pi0.size() != path.n_assets()) {
        throw DataError("lambda strategy: starting weights have wrong dimension");
    }
    std::vector<SimplexVector> series;
    series.reserve(path.n_times());
    series.push_back(pi0);
    for (std::size_t t = 0; t + 1 < path.n_times(); ++t) {
        const SimplexVector& pi_t = series.back();
        const SimplexVector& mu_next = path.mu(t + 1);
        if (lambda == 0.0) {
            series.push_back(pi_t);
            continue;
        }
        const double gamma = free_energy(pi_t, path.mu(t), mu_next);
        const std::size_t n = pi_t.size();
        std::vector<double> diff(n);
        double dist2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diff[i] = mu_next[i] - pi_t[i];
            dist2 += diff[i] * diff[i];
        }
        const double dist = std::sqrt(dist2);
        double s = 0.0;
        if (dist > 0.0 && gamma > 0.0) {
            // |grad H(pi|mu(t+1)) . v| along the unit direction v toward mu(t+1)
            double dd = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dd += (diff[i] / dist) *
                      std::log(std::max(pi_t[i], 1e-300) / std::max(mu_next[i], 1e-300));
            }
            const double slope = std::abs(dd);
            s = (slope == 0.0) ? 1.0 : std::min(1.0, lambda * gamma / (slope * dist));
        }
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = pi_t[i] + s * diff[i];
        series.emplace_back(std::move(next));
    }
    return series;
}

enum class StrategyKind { constant, market, flow, lambda_strategy };

inline std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::constant: return "constant";
        case StrategyKind::market: return "market";
        case StrategyKind::flow: return "flow";
        case StrategyKind::lambda_strategy: return "lambda_strategy";
    }
    return "?";
}

inline StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "constant") return StrategyKind::constant;
    if (s == "market") return StrategyKind::market;
    if (s == "flow") return StrategyKind::flow;
    if (s == "lambda_strategy") return StrategyKind::lambda_strategy;
    throw DataError("unknown strategy kind: " + s);
}

enum class FlowDirection { forward, reverse };

/// Declarative description of a rebalancing rule, sufficient to replay a
/// run deterministically.
struct StrategySpec {
    StrategyKind kind = StrategyKind::constant;
    std::vector<double> pi0;       // empty means equal weights
    double lambda = 0.0;           // budget fraction for lambda/flow-reverse
    FieldKind field = FieldKind::flow_out;
    FlowDirection direction = FlowDirection::forward;
    int substeps = 64;
    double duration = 1.0;         // flow time per market step

    static StrategySpec constant(std::vector<double> weights) {
        StrategySpec s;
        s.kind = StrategyKind::constant;
        s.pi0 = std::move(weights);
        return s;
    }

    static StrategySpec market() {
        StrategySpec s;
        s.kind = StrategyKind::market;
        return s;
    }

    static StrategySpec lambda_rebalance(double lam, std::vector<double> weights = {}) {
        StrategySpec s;
        s.kind = StrategyKind::lambda_strategy;
        s.lambda = lam;
        s.pi0 = std::move(weights);
        return s;
    }
};

inline SimplexVector initial_weights(const StrategySpec& spec, const MarketPath& path) {
    if (spec.pi0.empty()) return SimplexVector::uniform(path.n_assets());
    return SimplexVector(spec.pi0);
}

/// Run any declarative strategy over a path.
inline std::vector<SimplexVector> run_strategy(const StrategySpec& spec, const MarketPath& path) {
    switch (spec.kind) {
        case StrategyKind::constant:
            return make_constant(initial_weights(spec, path), path.n_times());
        case StrategyKind::market:
            return make_market(path);
        case StrategyKind::lambda_strategy:
            return run_lambda_strategy(path, spec.lambda, initial_weights(spec, path));
        case StrategyKind::flow: {
            VectorField field(spec.field);
            std::vector<SimplexVector> series;
            series.reserve(path.n_times());
            series.push_back(initial_weights(spec, path));
            for (std::size_t t = 0; t + 1 < path.n_times(); ++t) {
                const SimplexVector& pi_t = series.back();
                const SimplexVector& mu_next = path.mu(t + 1);
                if (spec.direction == FlowDirection::forward) {
                    series.push_back(
                        flow_step(field, pi_t, mu_next, spec.duration, spec.substeps));
                } else {
                    const double gamma = free_energy(pi_t, path.mu(t), mu_next);
                    series.push_back(reverse_flow_with_budget(field, pi_t, mu_next,
                                                              spec.lambda * gamma, spec.duration,
                                                              spec.substeps));
                }
            }
            return series;
        }
    }
    throw DataError("run_strategy: unhandled strategy kind");
}

} // namespace entroport
