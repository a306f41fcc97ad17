#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "entroport/curve.hpp"
#include "entroport/errors.hpp"

namespace entroport {

/// Log price ratio of two assets moving on a fixed grid: a starting value
/// and a sequence of +sigma / -sigma increments.
struct BinaryPath {
    double y0 = 0.0;
    double sigma = 0.1;
    std::vector<int> steps; // each +1 or -1

    BinaryPath() = default;
    BinaryPath(double y0_, double sigma_, std::vector<int> steps_)
        : y0(y0_), sigma(sigma_), steps(std::move(steps_)) {
        if (!(sigma > 0.0)) throw DataError("binary path: sigma must be positive");
        for (int s : steps) {
            if (s != 1 && s != -1) throw DataError("binary path: steps must be +1 or -1");
        }
    }

    double y_final() const {
        long net = 0;
        for (int s : steps) net += s;
        return y0 + static_cast<double>(net) * sigma;
    }

    long net_steps() const {
        long net = 0;
        for (int s : steps) net += s;
        return net;
    }
};

/// Matched up/down pairs per grid level plus the leftover one-directional
/// moves. Level k is the interval [y0 + k sigma, y0 + (k+1) sigma].
struct MatchTally {
    std::map<long, long> matched_per_level;
    long unmatched_count = 0;
    long total_matches = 0; // N
};

/// One-period growth factor 1 + q (e^{dy} - 1) of the two-asset portfolio
/// (q, 1-q) relative to the numeraire asset, for a log-ratio move dy.
inline double one_step_factor(double q, double dy) {
    if (q < 0.0 || q > 1.0) throw DataError("one_step_factor: q must lie in [0,1]");
    return 1.0 + q * std::expm1(dy);
}

/// Gain from one matched up/down pair at constant weight:
/// 1 + q(1-q) (e^{sigma/2} - e^{-sigma/2})^2 > 1.
inline double match_factor(double q, double sigma) {
    const double d = std::exp(sigma / 2.0) - std::exp(-sigma / 2.0);
    return 1.0 + q * (1.0 - q) * d * d;
}

/// Gain from a matched pair straddling [k sigma, (k+1) sigma] with a
/// state-dependent weight: the up move is taken at the lower level, the
/// down move at the upper one. Exceeds 1 whenever q is nonincreasing.
inline double state_dependent_match_factor(const WeightCurve& q_curve, long k, double sigma) {
    const double q_lo = q_curve(static_cast<double>(k) * sigma);
    const double q_hi = q_curve(static_cast<double>(k + 1) * sigma);
    return (1.0 + q_lo * std::expm1(sigma)) * (1.0 + q_hi * std::expm1(-sigma));
}

/// Pair each level crossing with the most recent unmatched crossing of the
/// same level in the opposite direction (one stack per level). The counts
/// do not depend on the pairing discipline; the stack makes them
/// deterministic. Leftover moves number exactly |Y(T) - Y(0)| / sigma.
inline MatchTally tally_matches(const BinaryPath& path) {
    MatchTally tally;
    // Per level: positive count = pending up moves, negative = pending downs.
    std::map<long, long> pending;
    long pos = 0; // current position in grid units
    for (int s : path.steps) {
        const long level = (s > 0) ? pos : pos - 1; // interval index being crossed
        long& p = pending[level];
        if ((s > 0 && p < 0) || (s < 0 && p > 0)) {
            p += s; // cancels one pending opposite move
            tally.matched_per_level[level] += 1;
            tally.total_matches += 1;
        } else {
            p += s;
        }
        pos += s;
    }
    for (const auto& [level, p] : pending) tally.unmatched_count += std::labs(p);
    if (tally.unmatched_count != std::labs(path.net_steps())) {
        throw IdentityError("tally_matches: unmatched count differs from |Y(T)-Y(0)|/sigma");
    }
    if (2 * tally.total_matches + tally.unmatched_count !=
        static_cast<long>(path.steps.size())) {
        throw IdentityError("tally_matches: matched/unmatched counts do not cover the path");
    }
    return tally;
}

/// The three terms of the constant-weight performance relative to the
/// two-asset market, plus their sum, which equals log(V(T)/S(T)).
struct TwoAssetDecomposition {
    double match_term = 0.0;         // N log(match factor)
    double unmatched_term = 0.0;     // trend contribution of unmatched moves
    double concentration_term = 0.0; // -log((e^{Y(T)}+1)/(e^{Y(0)}+1))
    double log_rel_value = 0.0;
};

inline TwoAssetDecomposition constant_weight_decomposition(const BinaryPath& path, double q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw DataError("constant_weight_decomposition: q must lie in (0,1)");
    }
    const MatchTally tally = tally_matches(path);
    TwoAssetDecomposition d;
    d.match_term = static_cast<double>(tally.total_matches) * std::log(match_factor(q, path.sigma));
    const long net = path.net_steps();
    if (net != 0) {
        const double f = one_step_factor(q, (net > 0 ? path.sigma : -path.sigma));
        d.unmatched_term = static_cast<double>(std::labs(net)) * std::log(f);
    }
    const double yT = path.y_final();
    // log((e^{yT}+1)/(e^{y0}+1)) via log1p for stability at large |y|
    auto log_market = [](double y) {
        return (y > 0.0) ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
    };
    d.concentration_term = -(log_market(yT) - log_market(path.y0));
    d.log_rel_value = d.match_term + d.unmatched_term + d.concentration_term;
    return d;
}

/// True when q'(y) <= q(y)(1 - q(y)) holds across the grid, i.e. the curve
/// never underperforms the market over a closed excursion. Derivative by
/// central differences with the grid resolution as the step; the tolerance
/// carries a resolution^2 allowance for the finite-difference error, so
/// curves satisfying the inequality with equality still pass.
inline bool check_reversion(const WeightCurve& q_curve, double y_lo, double y_hi,
                            double resolution) {
    if (!(resolution > 0.0) || !(y_hi > y_lo)) {
        throw DataError("check_reversion: bad grid");
    }
    const double slack = 1e-10 + resolution * resolution;
    for (double y = y_lo; y <= y_hi + 1e-15; y += resolution) {
        const double dq = (q_curve(y + resolution) - q_curve(y - resolution)) / (2.0 * resolution);
        const double q = q_curve(y);
        if (dq > q * (1.0 - q) + slack) return false;
    }
    return true;
}

/// Generating function S(mu1, mu2) = exp(F(log(mu1/mu2)) + log mu2) of the
/// curve, unique up to a multiplicative constant (anchor F(0) = 0).
/// Concave on the simplex exactly when the curve passes check_reversion.
inline std::function<double(double, double)> generating_function(const WeightCurve& q_curve) {
    return [q_curve](double mu1, double mu2) {
        if (!(mu1 > 0.0) || !(mu2 > 0.0)) {
            throw DataError("generating_function: market weights must be positive");
        }
        const double y = std::log(mu1 / mu2);
        return std::exp(q_curve.antiderivative(y) + std::log(mu2));
    };
}

/// Snap a real-valued series to the grid {y0 + k sigma} anchored at the
/// first observation (nearest level, ties toward the lower level) and emit
/// one +/- step per level crossed. Multi-level jumps emit multiple steps.
inline BinaryPath discretize_to_grid(const std::vector<double>& series, double sigma) {
    if (series.empty()) throw DataError("discretize_to_grid: empty series");
    if (!(sigma > 0.0)) throw DataError("discretize_to_grid: sigma must be positive");
    const double y0 = series.front();
    std::vector<int> steps;
    long pos = 0;
    for (double y : series) {
        const long target = static_cast<long>(std::ceil((y - y0) / sigma - 0.5));
        while (pos < target) {
            steps.push_back(+1);
            ++pos;
        }
        while (pos > target) {
            steps.push_back(-1);
            --pos;
        }
    }
    return BinaryPath(y0, sigma, std::move(steps));
}

/// Riemann approximation of the accumulated excess growth rate
/// (1/2) sum q(t)(1-q(t)) (dY(t))^2.
inline double excess_growth_riemann(const std::vector<double>& q_series,
                                    const std::vector<double>& y_series) {
    if (y_series.size() < 2 || q_series.size() + 1 != y_series.size()) {
        throw DataError("excess_growth_riemann: need one weight per increment");
    }
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < y_series.size(); ++t) {
        const double q = q_series[t];
        const double dy = y_series[t + 1] - y_series[t];
        sum += q * (1.0 - q) * dy * dy;
    }
    return 0.5 * sum;
}

/// CSV export: per-level matched counts, then summary rows for the total
/// match count and the unmatched moves.
inline void write_tally_csv(const MatchTally& tally, std::ostream& out) {
    out << "level,matched_count\n";
    for (const auto& [level, count] : tally.matched_per_level) {
        out << level << ',' << count << '\n';
    }
    out << "TOTAL_N," << tally.total_matches << '\n';
    out << "UNMATCHED," << tally.unmatched_count << '\n';
}

/// Text format: `y0 <value>`, `sigma <value>`, then one line of +/- chars.
inline void write_binary_path(const BinaryPath& path, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", path.y0);
    out << "y0 " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", path.sigma);
    out << "sigma " << buf << '\n';
    for (int s : path.steps) out << (s > 0 ? '+' : '-');
    out << '\n';
}

inline BinaryPath read_binary_path(std::istream& in) {
    std::string key;
    double y0 = 0.0, sigma = 0.0;
    if (!(in >> key >> y0) || key != "y0") throw DataError("binary path: expected 'y0 <value>'");
    if (!(in >> key >> sigma) || key != "sigma") {
        throw DataError("binary path: expected 'sigma <value>'");
    }
    std::string signs;
    in >> signs;
    std::vector<int> steps;
    steps.reserve(signs.size());
    for (char c : signs) {
        if (c == '+') steps.push_back(+1);
        else if (c == '-') steps.push_back(-1);
        else throw DataError(std::string("binary path: unexpected character '") + c + "'");
    }
    return BinaryPath(y0, sigma, std::move(steps));
}

} // namespace entroport
