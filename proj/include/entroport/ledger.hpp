#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/market_path.hpp"
#include "entroport/simplex.hpp"

namespace entroport {

/// One-step wealth ratio of the portfolio relative to the market:
/// V(t+1)/V(t) = sum_i pi_i(t) mu_i(t+1)/mu_i(t).
inline double relative_value_step(const SimplexVector& pi_t, const SimplexVector& mu_t,
                                  const SimplexVector& mu_next) {
    if (pi_t.size() != mu_t.size() || pi_t.size() != mu_next.size()) {
        throw DataError("relative_value_step: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pi_t.size(); ++i) {
        if (pi_t[i] == 0.0) continue;
        if (mu_t[i] == 0.0) {
            throw DataError("relative_value_step: zero market weight on portfolio support, asset " +
                            std::to_string(i));
        }
        sum += pi_t[i] * mu_next[i] / mu_t[i];
    }
    return sum;
}

/// Free energy for one period from the per-asset log changes dy_i of the
/// market weights (or of any numeraire-consistent prices):
/// log sum_i pi_i e^{dy_i} - sum_i pi_i dy_i. Nonnegative; zero only when
/// dy is constant over the support of pi.
inline double free_energy_from_log_changes(const SimplexVector& pi,
                                           const std::vector<double>& dy) {
    if (pi.size() != dy.size()) {
        throw DataError("free_energy: dimension mismatch");
    }
    // Shift by the max over the support for a stable log-sum-exp.
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] > 0.0 && dy[i] > shift) shift = dy[i];
    }
    double lse = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] == 0.0) continue;
        lse += pi[i] * std::exp(dy[i] - shift);
        mean += pi[i] * dy[i];
    }
    double g = std::log(lse) + shift - mean;
    if (g < 0.0 && g > -1e-12) g = 0.0; // rounding cloud; true value >= 0
    return g;
}

/// Free energy from market weights at t and t+1.
inline double free_energy(const SimplexVector& pi_t, const SimplexVector& mu_t,
                          const SimplexVector& mu_next) {
    if (pi_t.size() != mu_t.size() || pi_t.size() != mu_next.size()) {
        throw DataError("free_energy: dimension mismatch");
    }
    std::vector<double> dy(pi_t.size(), 0.0);
    for (std::size_t i = 0; i < pi_t.size(); ++i) {
        if (pi_t[i] == 0.0) continue;
        if (mu_t[i] == 0.0 || mu_next[i] == 0.0) {
            throw DataError("free_energy: zero market weight on portfolio support, asset " +
                            std::to_string(i));
        }
        dy[i] = std::log(mu_next[i] / mu_t[i]);
    }
    return free_energy_from_log_changes(pi_t, dy);
}

/// Horizon after which relative value at least e^r is guaranteed when the
/// market weights stay above delta and the per-step drift is at least
/// epsilon: (r - log delta) / epsilon.
inline double outperformance_horizon(double r, double delta, double epsilon) {
    if (!(epsilon > 0.0)) throw DataError("outperformance_horizon: epsilon must be positive");
    if (!(delta > 0.0) || delta > 1.0) {
        throw DataError("outperformance_horizon: delta must lie in (0, 1]");
    }
    if (r < 0.0) throw DataError("outperformance_horizon: r must be nonnegative");
    return (r - std::log(delta)) / epsilon;
}

/// Per-step record of the decomposition
/// delta log V = free energy - delta relative entropy + control.
struct LedgerRow {
    std::size_t t = 0;
    double free_energy = 0.0;    // gamma*(t) >= 0
    double entropy_change = 0.0; // H(pi(t)|mu(t)) - H(pi(t+1)|mu(t+1))
    double control = 0.0;        // H(pi(t+1)|mu(t+1)) - H(pi(t)|mu(t+1))
    double delta_log_v = 0.0;
    double delta_drift = 0.0;    // free_energy + control
    double log_v_cum = 0.0;      // running sum of delta_log_v through this step
    double entropy_level = 0.0;  // H(pi(t+1)|mu(t+1))
};

/// Full decomposition of a strategy's log relative value along a path.
struct DecompositionLedger {
    std::vector<LedgerRow> rows;
    double initial_entropy = 0.0; // H(pi(0)|mu(0))
    double final_entropy = 0.0;   // H(pi(T)|mu(T))
    bool is_energy_entropy = true;
    bool is_greedy_entropy = true;

    double log_v_total() const { return rows.empty() ? 0.0 : rows.back().log_v_cum; }

    double drift_total() const {
        double d = 0.0;
        for (const auto& r : rows) d += r.delta_drift;
        return d;
    }

    /// Residual of log V(T) = D(T) + H(pi(0)|mu(0)) - H(pi(T)|mu(T)).
    double identity_residual() const {
        return log_v_total() - drift_total() - initial_entropy + final_entropy;
    }
};

namespace detail {

inline double entropy_or_throw(const SimplexVector& pi, const SimplexVector& mu,
                               std::size_t t) {
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] > 0.0 && mu[i] == 0.0) {
            throw DataError("ledger: infinite relative entropy at t=" + std::to_string(t) +
                            ": portfolio holds asset " + std::to_string(i) +
                            " whose market weight vanishes");
        }
    }
    return relative_entropy(pi, mu).value();
}

} // namespace detail

/// Fold a portfolio-weight series against a market path into the exact
/// per-step decomposition. The caller is responsible for pi(t) using only
/// information through time t; the ledger just consumes the series.
inline DecompositionLedger build_ledger(const MarketPath& path,
                                        const std::vector<SimplexVector>& pi_series) {
    if (pi_series.size() != path.n_times()) {
        throw DataError("build_ledger: need one portfolio per time point (" +
                        std::to_string(pi_series.size()) + " given, " +
                        std::to_string(path.n_times()) + " needed)");
    }
    DecompositionLedger ledger;
    const std::size_t T = path.n_times() - 1;
    ledger.rows.reserve(T);
    ledger.initial_entropy = detail::entropy_or_throw(pi_series[0], path.mu(0), 0);
    double h_prev = ledger.initial_entropy; // H(pi(t)|mu(t))
    double log_v = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const SimplexVector& pi_t = pi_series[t];
        const SimplexVector& pi_next = pi_series[t + 1];
        const SimplexVector& mu_t = path.mu(t);
        const SimplexVector& mu_next = path.mu(t + 1);

        LedgerRow row;
        row.t = t;
        row.free_energy = free_energy(pi_t, mu_t, mu_next);
        const double h_cross = detail::entropy_or_throw(pi_t, mu_next, t);
        const double h_next = detail::entropy_or_throw(pi_next, mu_next, t + 1);
        row.entropy_change = h_prev - h_next;
        row.control = h_next - h_cross;
        row.delta_log_v = std::log(relative_value_step(pi_t, mu_t, mu_next));
        row.delta_drift = row.free_energy + row.control;
        if (std::abs(row.delta_log_v - (row.free_energy + row.entropy_change + row.control)) >
            1e-10) {
            throw IdentityError("ledger: one-step decomposition identity failed at t=" +
                                std::to_string(t));
        }
        log_v += row.delta_log_v;
        row.log_v_cum = log_v;
        row.entropy_level = h_next;
        if (row.delta_drift < -1e-12) ledger.is_energy_entropy = false;
        if (row.control < -1e-12) ledger.is_greedy_entropy = false;
        ledger.rows.push_back(row);
        h_prev = h_next;
    }
    ledger.final_entropy = h_prev;
    return ledger;
}

namespace detail {

inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

} // namespace detail

/// CSV export; column names and order are part of the format contract.
inline void write_ledger_csv(const DecompositionLedger& ledger, std::ostream& out) {
    out << "t,gamma_star,entropy_change,control,delta_drift,log_v_cum,entropy_level\n";
    for (const auto& r : ledger.rows) {
        out << r.t << ',' << detail::fmt17(r.free_energy) << ','
            << detail::fmt17(r.entropy_change) << ',' << detail::fmt17(r.control) << ','
            << detail::fmt17(r.delta_drift) << ',' << detail::fmt17(r.log_v_cum) << ','
            << detail::fmt17(r.entropy_level) << '\n';
    }
}

/// JSON-lines export: one object per row, same fields as the CSV.
inline void write_ledger_jsonl(const DecompositionLedger& ledger, std::ostream& out) {
    for (const auto& r : ledger.rows) {
        out << "{\"t\":" << r.t << ",\"gamma_star\":" << detail::fmt17(r.free_energy)
            << ",\"entropy_change\":" << detail::fmt17(r.entropy_change)
            << ",\"control\":" << detail::fmt17(r.control)
            << ",\"delta_drift\":" << detail::fmt17(r.delta_drift)
            << ",\"log_v_cum\":" << detail::fmt17(r.log_v_cum)
            << ",\"entropy_level\":" << detail::fmt17(r.entropy_level) << "}\n";
    }
}

} // namespace entroport
