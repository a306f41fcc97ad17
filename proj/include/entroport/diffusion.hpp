#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/quadrature.hpp"
#include "entroport/random.hpp"
#include "entroport/variational.hpp"

namespace entroport {

enum class DiffusionKind { bang_bang, ou, general };

inline std::string to_string(DiffusionKind k) {
    switch (k) {
        case DiffusionKind::bang_bang: return "bang_bang";
        case DiffusionKind::ou: return "ou";
        case DiffusionKind::general: return "general";
    }
    return "?";
}

inline DiffusionKind diffusion_kind_from_string(const std::string& s) {
    if (s == "bang_bang") return DiffusionKind::bang_bang;
    if (s == "ou") return DiffusionKind::ou;
    if (s == "general") return DiffusionKind::general;
    throw DataError("unknown diffusion kind: " + s);
}

/// One-dimensional diffusion dY = b(Y) dt + sigma(Y) dbeta together with
/// the simulation resolution: Euler step h and level window half-width eps.
/// Built-ins: bang_bang pulls toward 0 at constant rate alpha, ou at rate
/// alpha * Y; both with constant volatility.
struct DiffusionSpec {
    DiffusionKind kind = DiffusionKind::bang_bang;
    double alpha = 1.0;
    double sigma = 1.0;
    std::function<double(double)> drift;     // general only
    std::function<double(double)> diffusion; // general only
    double h = 1e-4;
    double eps = 0.02;
    double max_time = 1e3; // per-path budget; breaches reported, never silent

    static DiffusionSpec bang_bang(double alpha, double sigma, double h = 1e-4,
                                   double eps = 0.02) {
        DiffusionSpec s;
        s.kind = DiffusionKind::bang_bang;
        s.alpha = alpha;
        s.sigma = sigma;
        s.h = h;
        s.eps = eps;
        s.validate();
        return s;
    }

    static DiffusionSpec ou(double alpha, double sigma, double h = 1e-4, double eps = 0.02) {
        DiffusionSpec s;
        s.kind = DiffusionKind::ou;
        s.alpha = alpha;
        s.sigma = sigma;
        s.h = h;
        s.eps = eps;
        s.validate();
        return s;
    }

    static DiffusionSpec general(std::function<double(double)> b,
                                 std::function<double(double)> sig, double h = 1e-4,
                                 double eps = 0.02) {
        DiffusionSpec s;
        s.kind = DiffusionKind::general;
        s.drift = std::move(b);
        s.diffusion = std::move(sig);
        s.h = h;
        s.eps = eps;
        s.validate();
        return s;
    }

    void validate() const {
        if (kind != DiffusionKind::general && (!(alpha > 0.0) || !(sigma > 0.0))) {
            throw DataError("diffusion spec: alpha and sigma must be positive");
        }
        if (!(h > 0.0) || !(eps > 0.0)) {
            throw DataError("diffusion spec: h and eps must be positive");
        }
        if (kind == DiffusionKind::general && (!drift || !diffusion)) {
            throw DataError("diffusion spec: general kind needs drift and diffusion");
        }
    }

    double b(double y) const {
        switch (kind) {
            case DiffusionKind::bang_bang:
                return (y > 0.0) ? -alpha : (y < 0.0 ? alpha : 0.0);
            case DiffusionKind::ou: return -alpha * y;
            case DiffusionKind::general: return drift(y);
        }
        return 0.0;
    }

    double sig(double y) const {
        return kind == DiffusionKind::general ? diffusion(y) : sigma;
    }
};

/// Scale-function density s'(y) = exp(-int_0^y 2 b / sigma^2), anchored at
/// 0 so s'(0) = 1. Closed forms for the built-ins, quadrature otherwise.
inline double scale_density(const DiffusionSpec& spec, double y) {
    switch (spec.kind) {
        case DiffusionKind::bang_bang:
            return std::exp(2.0 * spec.alpha * std::abs(y) / (spec.sigma * spec.sigma));
        case DiffusionKind::ou:
            return std::exp(spec.alpha * y * y / (spec.sigma * spec.sigma));
        case DiffusionKind::general: {
            auto f = [&spec](double u) {
                const double s = spec.sig(u);
                return 2.0 * spec.b(u) / (s * s);
            };
            const double integral = (y >= 0.0) ? integrate(f, 0.0, y) : -integrate(f, y, 0.0);
            return std::exp(-integral);
        }
    }
    return 1.0;
}

/// Expected local time at y until the local time at zero reaches one,
/// s'(0)/s'(y); the quantity the Monte Carlo estimates converge to.
inline double expected_local_time(const DiffusionSpec& spec, double y) {
    return scale_density(spec, 0.0) / scale_density(spec, y);
}

/// Per-level Monte Carlo local-time means with standard errors.
struct LocalTimeProfile {
    std::vector<double> levels;
    std::vector<double> estimates;
    std::vector<double> stderrs;
    std::size_t n_paths = 0;
    std::size_t budget_breaches = 0;

    double estimate_at(double y) const {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (std::abs(levels[i] - y) < 1e-12) return estimates[i];
        }
        throw DataError("local-time profile: level not present");
    }

    double stderr_at(double y) const {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (std::abs(levels[i] - y) < 1e-12) return stderrs[i];
        }
        throw DataError("local-time profile: level not present");
    }
};

/// Euler-Maruyama paths from Y(0) = 0, each run until the discrete local
/// time at zero reaches one. Local time at a level accrues as
/// h sigma^2(Y) / (2 eps) while |Y - level| < eps (occupation estimator).
/// Deterministic for a given (spec, n_paths, seed): per-path streams are
/// keyed by (seed, path index) and the reduction is order-independent.
inline LocalTimeProfile simulate_local_time_profile(const DiffusionSpec& spec,
                                                    std::vector<double> levels,
                                                    std::size_t n_paths, std::uint64_t seed) {
    spec.validate();
    if (n_paths == 0) throw DataError("simulate_local_time_profile: need at least one path");
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 levels.end());
    // the stopping clock lives at level zero; reuse a level that is zero up
    // to rounding rather than adding a near-duplicate
    bool has_zero = false;
    for (double& y : levels) {
        if (std::abs(y) < 1e-9) {
            y = 0.0;
            has_zero = true;
        }
    }
    if (!has_zero) {
        levels.push_back(0.0);
        std::sort(levels.begin(), levels.end());
    }
    const std::size_t m = levels.size();
    std::size_t zero_idx = 0;
    while (levels[zero_idx] != 0.0) ++zero_idx;

    const double sqrt_h = std::sqrt(spec.h);
    const double window = spec.eps;
    const long max_steps = static_cast<long>(spec.max_time / spec.h);

    std::vector<double> sum(m, 0.0), sum_sq(m, 0.0);
    std::vector<double> local(m, 0.0);
    std::size_t completed = 0, breaches = 0;

    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng = Rng::keyed(seed, p);
        std::fill(local.begin(), local.end(), 0.0);
        double y = 0.0;
        bool done = false;
        for (long step = 0; step < max_steps; ++step) {
            const double s = spec.sig(y);
            // levels within the window around y: [y - eps, y + eps)
            const double gain = spec.h * s * s / (2.0 * window);
            auto lo = std::lower_bound(levels.begin(), levels.end(), y - window);
            for (auto it = lo; it != levels.end() && *it < y + window; ++it) {
                const std::size_t idx = static_cast<std::size_t>(it - levels.begin());
                local[idx] += gain;
            }
            if (local[zero_idx] >= 1.0) {
                done = true;
                break;
            }
            y += spec.b(y) * spec.h + s * sqrt_h * rng.normal();
        }
        if (!done) {
            ++breaches;
            continue;
        }
        ++completed;
        for (std::size_t i = 0; i < m; ++i) {
            sum[i] += local[i];
            sum_sq[i] += local[i] * local[i];
        }
    }
    if (completed == 0) {
        throw DataError("simulate_local_time_profile: every path exceeded the time budget");
    }

    LocalTimeProfile profile;
    profile.levels = levels;
    profile.n_paths = completed;
    profile.budget_breaches = breaches;
    profile.estimates.resize(m);
    profile.stderrs.resize(m);
    const double n = static_cast<double>(completed);
    for (std::size_t i = 0; i < m; ++i) {
        const double mean = sum[i] / n;
        profile.estimates[i] = mean;
        const double var = std::max(0.0, (sum_sq[i] - n * mean * mean) / std::max(1.0, n - 1.0));
        profile.stderrs[i] = std::sqrt(var / n);
    }
    return profile;
}

/// Piecewise-linear weight function tabulated from a simulated profile.
inline WeightFunction to_weight_function(const LocalTimeProfile& profile) {
    if (profile.levels.size() < 3) {
        throw DataError("to_weight_function: need at least three levels");
    }
    std::vector<double> ws(profile.estimates.size());
    for (std::size_t i = 0; i < ws.size(); ++i) ws[i] = std::max(0.0, profile.estimates[i]);
    return WeightFunction::tabulated(profile.levels, ws);
}

/// Shared key-value config form; `general` specs carry code, not text, and
/// are not serializable.
template <typename Config>
Config diffusion_spec_to_config(const DiffusionSpec& spec) {
    if (spec.kind == DiffusionKind::general) {
        throw DataError("diffusion spec: general coefficients are not serializable");
    }
    Config cfg;
    cfg.set("kind", to_string(spec.kind));
    cfg.set("alpha", spec.alpha);
    cfg.set("sigma", spec.sigma);
    cfg.set("h", spec.h);
    cfg.set("eps", spec.eps);
    return cfg;
}

template <typename Config>
DiffusionSpec diffusion_spec_from_config(const Config& cfg) {
    const DiffusionKind kind = diffusion_kind_from_string(cfg.get("kind"));
    const double alpha = cfg.get_double("alpha");
    const double sigma = cfg.get_double("sigma");
    const double h = cfg.get_double_or("h", 1e-4);
    const double eps = cfg.get_double_or("eps", 0.02);
    return (kind == DiffusionKind::bang_bang) ? DiffusionSpec::bang_bang(alpha, sigma, h, eps)
                                              : DiffusionSpec::ou(alpha, sigma, h, eps);
}

inline void write_profile_csv(const LocalTimeProfile& profile, std::ostream& out) {
    out << "y,estimate,stderr,n_paths\n";
    char buf[64];
    for (std::size_t i = 0; i < profile.levels.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", profile.levels[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", profile.estimates[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", profile.stderrs[i]);
        out << buf << ',' << profile.n_paths << '\n';
    }
}

} // namespace entroport
