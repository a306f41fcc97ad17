#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/quadrature.hpp"

namespace entroport {

enum class CurveSmoothness { finite_variation_continuous, c1 };

/// State-dependent weight q : R -> [0,1] for the first of two assets, as a
/// function of the log price ratio. Optionally carries an analytic
/// derivative, an antiderivative, and a list of kink locations used to
/// split quadratures.
class WeightCurve {
public:
    WeightCurve(std::function<double(double)> q,
                CurveSmoothness smoothness = CurveSmoothness::c1,
                std::function<double(double)> derivative = {},
                std::function<double(double)> antiderivative = {},
                std::vector<double> breakpoints = {})
        : q_(std::move(q)),
          smoothness_(smoothness),
          derivative_(std::move(derivative)),
          antiderivative_(std::move(antiderivative)),
          breakpoints_(std::move(breakpoints)) {}

    double operator()(double y) const {
        const double v = q_(y);
        if (v < -1e-12 || v > 1.0 + 1e-12) {
            throw DataError("weight curve left [0,1] at y=" + std::to_string(y));
        }
        return std::min(1.0, std::max(0.0, v));
    }

    CurveSmoothness smoothness() const { return smoothness_; }
    bool has_derivative() const { return static_cast<bool>(derivative_); }
    double derivative(double y) const { return derivative_(y); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    /// Antiderivative anchored at F(0) = 0; quadrature when not supplied.
    double antiderivative(double y) const {
        if (antiderivative_) return antiderivative_(y) - antiderivative_(0.0);
        auto f = [this](double u) { return (*this)(u); };
        if (y >= 0.0) return integrate_piecewise(f, 0.0, y, breakpoints_, 1e-12);
        return -integrate_piecewise(f, y, 0.0, breakpoints_, 1e-12);
    }

    static WeightCurve constant(double q) {
        if (q < 0.0 || q > 1.0) throw DataError("constant weight must lie in [0,1]");
        return WeightCurve([q](double) { return q; }, CurveSmoothness::c1,
                           [](double) { return 0.0; }, [q](double y) { return q * y; });
    }

    /// q(y) = e^{ky} / (1 + e^{ky}); k = 1 reproduces the market weight of
    /// asset 1 as a function of the log price ratio.
    static WeightCurve logistic(double k = 1.0) {
        auto q = [k](double y) { return 1.0 / (1.0 + std::exp(-k * y)); };
        auto dq = [k, q](double y) {
            const double v = q(y);
            return k * v * (1.0 - v);
        };
        auto F = [k](double y) {
            // antiderivative of the logistic: log(1 + e^{ky}) / k, computed stably
            const double z = k * y;
            return (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) / k;
        };
        return WeightCurve(q, CurveSmoothness::c1, dq, F);
    }

    static WeightCurve market() { return logistic(1.0); }

    /// Piecewise-linear curve through the given (y, q) knots; constant
    /// extrapolation outside the knot range.
    static WeightCurve piecewise_linear(std::vector<double> ys, std::vector<double> qs) {
        if (ys.size() != qs.size() || ys.size() < 2) {
            throw DataError("piecewise_linear: need at least two knots");
        }
        for (std::size_t i = 1; i < ys.size(); ++i) {
            if (!(ys[i] > ys[i - 1])) throw DataError("piecewise_linear: knots must increase");
        }
        auto q = [ys, qs](double y) {
            if (y <= ys.front()) return qs.front();
            if (y >= ys.back()) return qs.back();
            std::size_t hi = 1;
            while (ys[hi] < y) ++hi;
            const double t = (y - ys[hi - 1]) / (ys[hi] - ys[hi - 1]);
            return qs[hi - 1] + t * (qs[hi] - qs[hi - 1]);
        };
        return WeightCurve(q, CurveSmoothness::finite_variation_continuous, {}, {}, ys);
    }

private:
    std::function<double(double)> q_;
    CurveSmoothness smoothness_;
    std::function<double(double)> derivative_;
    std::function<double(double)> antiderivative_;
    std::vector<double> breakpoints_;
};

} // namespace entroport
