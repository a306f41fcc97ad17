#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entroport/curve.hpp"
#include "entroport/errors.hpp"
#include "entroport/quadrature.hpp"

namespace entroport {

enum class WeightKind { bang_bang, ou, general, tabulated };

inline std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::bang_bang: return "bang_bang";
        case WeightKind::ou: return "ou";
        case WeightKind::general: return "general";
        case WeightKind::tabulated: return "tabulated";
    }
    return "?";
}

/// Integrable weight profile w(y) >= 0 standing for the expected local time
/// at each level. Built-ins: bang_bang(gamma) = e^{-gamma |y|} and
/// ou(gamma) = e^{-gamma y^2}; `general` wraps w = e^{phi(y)} with C^1 phi;
/// `tabulated` interpolates a sampled profile linearly and vanishes outside
/// its support.
class WeightFunction {
public:
    static WeightFunction bang_bang(double gamma) {
        check_gamma(gamma);
        WeightFunction w;
        w.kind_ = WeightKind::bang_bang;
        w.gamma_ = gamma;
        w.w_ = [gamma](double y) { return std::exp(-gamma * std::abs(y)); };
        w.dw_ = [gamma](double y) {
            return (y >= 0.0 ? -gamma : gamma) * std::exp(-gamma * std::abs(y));
        };
        w.breakpoints_ = {0.0};
        w.y_max_ = std::max(1.0, 30.0 / gamma); // e^{-30} tail
        return w;
    }

    static WeightFunction ou(double gamma) {
        check_gamma(gamma);
        WeightFunction w;
        w.kind_ = WeightKind::ou;
        w.gamma_ = gamma;
        w.w_ = [gamma](double y) { return std::exp(-gamma * y * y); };
        w.dw_ = [gamma](double y) { return -2.0 * gamma * y * std::exp(-gamma * y * y); };
        w.y_max_ = std::max(1.0, std::sqrt(30.0 / gamma));
        return w;
    }

    /// w = e^{phi(y)} for continuously differentiable phi.
    static WeightFunction general(std::function<double(double)> phi,
                                  std::function<double(double)> phi_prime, double y_max) {
        WeightFunction w;
        w.kind_ = WeightKind::general;
        w.phi_ = phi;
        w.phi_prime_ = phi_prime;
        w.w_ = [phi](double y) { return std::exp(phi(y)); };
        w.dw_ = [phi, phi_prime](double y) { return phi_prime(y) * std::exp(phi(y)); };
        w.y_max_ = y_max;
        return w;
    }

    static WeightFunction tabulated(std::vector<double> ys, std::vector<double> ws) {
        if (ys.size() != ws.size() || ys.size() < 3) {
            throw DataError("tabulated weight: need at least three samples");
        }
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (i > 0 && !(ys[i] > ys[i - 1])) {
                throw DataError("tabulated weight: levels must increase");
            }
            if (ws[i] < 0.0) throw DataError("tabulated weight: negative value");
        }
        WeightFunction w;
        w.kind_ = WeightKind::tabulated;
        w.y_max_ = std::max(std::abs(ys.front()), std::abs(ys.back()));
        w.breakpoints_ = ys;
        w.w_ = [ys, ws](double y) {
            if (y <= ys.front() || y >= ys.back()) {
                // exact endpoints included in the support
                if (y == ys.front()) return ws.front();
                if (y == ys.back()) return ws.back();
                return 0.0;
            }
            std::size_t hi = 1;
            while (ys[hi] < y) ++hi;
            const double t = (y - ys[hi - 1]) / (ys[hi] - ys[hi - 1]);
            return ws[hi - 1] + t * (ws[hi] - ws[hi - 1]);
        };
        return w;
    }

    WeightKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double operator()(double y) const { return w_(y); }
    bool has_derivative() const { return static_cast<bool>(dw_); }
    double derivative(double y) const { return dw_(y); }
    double y_max() const { return y_max_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    /// Quadrature bound for integrability; throws when the tail refuses to
    /// decay.
    double total_mass() const {
        auto f = [this](double y) { return (*this)(y); };
        const double mass = integrate_piecewise(f, -y_max_, y_max_, breakpoints_, 1e-10);
        const double edge = std::max((*this)(y_max_), (*this)(-y_max_));
        if (edge > 1e-6 * std::max(1.0, mass)) {
            throw DataError("weight function: tail mass not negligible at the quadrature "
                            "boundary; not integrable enough");
        }
        return mass;
    }

private:
    static void check_gamma(double gamma) {
        if (!(gamma > 0.0)) throw DataError("weight function: gamma must be positive");
    }

    WeightKind kind_ = WeightKind::general;
    double gamma_ = 0.0;
    std::function<double(double)> w_;
    std::function<double(double)> dw_;
    std::function<double(double)> phi_;
    std::function<double(double)> phi_prime_;
    std::vector<double> breakpoints_;
    double y_max_ = 10.0;
};

namespace detail {

inline std::vector<double> merged_breakpoints(const WeightCurve& q, const WeightFunction& w) {
    std::vector<double> cuts = q.breakpoints();
    cuts.insert(cuts.end(), w.breakpoints().begin(), w.breakpoints().end());
    cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

// Stieltjes integral of w against d(-q) over [-Ymax, Ymax]: analytic
// derivative when the curve carries one, otherwise a midpoint Stieltjes sum
// on a fine partition split at the breakpoints.
inline double stieltjes_against_minus_dq(const WeightCurve& q, const WeightFunction& w,
                                         const std::vector<double>& cuts, double y_max) {
    if (q.has_derivative()) {
        auto f = [&](double y) { return -w(y) * q.derivative(y); };
        return integrate_piecewise(f, -y_max, y_max, cuts, 1e-12);
    }
    double total = 0.0;
    std::vector<double> edges = cuts;
    edges.insert(edges.begin(), -y_max);
    edges.push_back(y_max);
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = std::max(edges[i], -y_max);
        const double b = std::min(edges[i + 1], y_max);
        if (!(b > a)) continue;
        const int n = 4000;
        const double h = (b - a) / n;
        double prev_q = q(a);
        for (int k = 1; k <= n; ++k) {
            const double y = a + k * h;
            const double cur_q = q(y);
            total += w(y - 0.5 * h) * (prev_q - cur_q);
            prev_q = cur_q;
        }
    }
    return total;
}

} // namespace detail

/// The rebalancing-gain functional of a weight curve against a local-time
/// weight: integral of q(1-q) w plus the Stieltjes integral of w against
/// d(-q). Twice the expected log relative value accumulated until the local
/// time at zero reaches one.
inline double excursion_premium(const WeightCurve& q, const WeightFunction& w) {
    const double y_max = w.y_max();
    const auto cuts = detail::merged_breakpoints(q, w);
    auto f = [&](double y) {
        const double qv = q(y);
        return qv * (1.0 - qv) * w(y);
    };
    const double quad = integrate_piecewise(f, -y_max, y_max, cuts, 1e-12);
    return quad + detail::stieltjes_against_minus_dq(q, w, cuts, y_max);
}

/// Same functional evaluated through integration by parts, in the reported
/// convention that carries the origin term 2 w(0) q(0):
/// 2 w(0) q(0) + integral of (q(1-q) w + q w'). Requires piecewise-C^1 w
/// vanishing at infinity. Optimal-curve values and closed-form benchmarks
/// are quoted on this scale; it exceeds excursion_premium by exactly
/// 2 w(0) q(0).
inline double excursion_premium_reported(const WeightCurve& q, const WeightFunction& w) {
    if (!w.has_derivative()) {
        return excursion_premium(q, w) + 2.0 * w(0.0) * q(0.0);
    }
    const double y_max = w.y_max();
    const auto cuts = detail::merged_breakpoints(q, w);
    auto f = [&](double y) {
        const double qv = q(y);
        return qv * (1.0 - qv) * w(y) + qv * w.derivative(y);
    };
    return 2.0 * w(0.0) * q(0.0) + integrate_piecewise(f, -y_max, y_max, cuts, 1e-12);
}

/// Floor and weight-ratio constraints on the admissible curves.
/// The ratio bounds pi_i / mu_i in [A, B] translate into a state-dependent
/// band [lower_bound(y), upper_bound(y)] around the market curve.
struct ConstraintSet {
    double q_floor = 0.0;                           // delta in [0, 1/2]
    std::optional<std::pair<double, double>> ratio; // (A, B), 0 < A < 1 < B

    void validate() const {
        if (q_floor < 0.0 || q_floor > 0.5) {
            throw DataError("constraints: floor must lie in [0, 1/2]");
        }
        if (ratio) {
            const auto [A, B] = *ratio;
            if (!(A > 0.0 && A < 1.0 && B > 1.0)) {
                throw DataError("constraints: need 0 < A < 1 < B");
            }
        }
    }

    // Floor: q >= delta everywhere (binds only on y > 0 where the optimum is
    // low). Ratio bounds A <= pi_i/mu_i <= B for both assets give the band
    // [max(A mu1, 1 - B mu2), min(B mu1, 1 - A mu2)]; on y > 0 the lower edge
    // is the binding one, on y < 0 its mirror (the upper edge) is.
    double lower_bound(double y) const {
        double lo = q_floor;
        if (ratio) {
            const auto [A, B] = *ratio;
            const double mu1 = 1.0 / (1.0 + std::exp(-y));
            lo = std::max(lo, std::max(A * mu1, 1.0 - B * (1.0 - mu1)));
        }
        return std::min(lo, 1.0);
    }

    double upper_bound(double y) const {
        double hi = 1.0;
        if (ratio) {
            const auto [A, B] = *ratio;
            const double mu1 = 1.0 / (1.0 + std::exp(-y));
            hi = std::min(hi, std::min(B * mu1, 1.0 - A * (1.0 - mu1)));
        }
        return std::max(hi, 0.0);
    }
};

struct OptimalCurve {
    WeightCurve q;
    double value = 0.0;            // reported-scale value of q
    double equal_weight_value = 0.0; // reported-scale value of q = 1/2
    double interpolation_width = 0.0; // eta, when a discontinuity was smoothed
};

/// Pointwise maximizer of the gain integrand, clamped into [0,1] and into
/// the constraint band. For w = e^{phi}: q*(y) = (1 + phi'(y)) / 2. The
/// bang-bang optimum jumps at 0 and is interpolated continuously over a
/// window of width eta, approaching the supremum as eta -> 0.
inline OptimalCurve optimal_weight_curve(const WeightFunction& w,
                                         const ConstraintSet& constraints = {},
                                         double eta = 1e-3) {
    constraints.validate();
    std::function<double(double)> unconstrained;
    std::vector<double> kinks;
    switch (w.kind()) {
        case WeightKind::bang_bang: {
            const double g = w.gamma();
            const double lo = 0.5 * std::max(1.0 - g, 0.0); // value on y > 0
            const double hi = 1.0 - lo;                     // value on y < 0
            const double half = 0.5 * eta;
            unconstrained = [lo, hi, half](double y) {
                if (y >= half) return lo;
                if (y <= -half) return hi;
                return 0.5 + (lo - 0.5) * (y / half);
            };
            kinks = {-half, half};
            break;
        }
        case WeightKind::ou: {
            const double g = w.gamma();
            unconstrained = [g](double y) {
                return std::min(1.0, std::max(0.0, 0.5 * (1.0 - 2.0 * g * y)));
            };
            kinks = {-0.5 / g, 0.5 / g}; // where the clamp activates
            break;
        }
        case WeightKind::general: {
            if (!w.has_derivative()) {
                throw DataError("optimal_weight_curve: general weight needs a derivative");
            }
            unconstrained = [w](double y) {
                const double wv = w(y);
                const double phi_prime = (wv > 0.0) ? w.derivative(y) / wv : 0.0;
                return std::min(1.0, std::max(0.0, 0.5 * (1.0 + phi_prime)));
            };
            break;
        }
        case WeightKind::tabulated:
            throw DataError("optimal_weight_curve: tabulated weights have no smooth "
                            "pointwise optimum; fit a general form first");
    }
    auto constrained = [unconstrained, constraints](double y) {
        return std::min(constraints.upper_bound(y),
                        std::max(constraints.lower_bound(y), unconstrained(y)));
    };
    WeightCurve q(constrained, CurveSmoothness::finite_variation_continuous, {}, {}, kinks);
    OptimalCurve out{q, 0.0, 0.0, (w.kind() == WeightKind::bang_bang) ? eta : 0.0};
    out.value = excursion_premium_reported(q, w);
    out.equal_weight_value = excursion_premium_reported(WeightCurve::constant(0.5), w);
    return out;
}

/// Weight maximizing the growth rate of a two-asset portfolio under drift a
/// and volatility b: (1 + 2a/b^2) / 2.
inline double growth_rate_weight(double a, double b) {
    if (b == 0.0) throw DataError("growth_rate_weight: volatility must be nonzero");
    return 0.5 * (1.0 + 2.0 * a / (b * b));
}

} // namespace entroport
