#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/ledger.hpp"
#include "entroport/simplex.hpp"

namespace entroport {

/// Two-level portfolio of portfolios: sector weights over m sectors, and a
/// within-sector portfolio for each. Sectors map injectively into a flat
/// universe of n stocks and must be disjoint. Deeper trees compose by
/// applying the two-level chain rules recursively.
class HierarchicalPortfolio {
public:
    HierarchicalPortfolio(SimplexVector sector_weights,
                          std::vector<SimplexVector> sector_portfolios,
                          std::vector<std::vector<std::size_t>> universe_map,
                          std::size_t universe_size)
        : lambda_(std::move(sector_weights)),
          portfolios_(std::move(sector_portfolios)),
          map_(std::move(universe_map)),
          n_(universe_size) {
        const std::size_t m = lambda_.size();
        if (portfolios_.size() != m || map_.size() != m) {
            throw DataError("hierarchy: sector counts do not match");
        }
        std::vector<bool> used(n_, false);
        for (std::size_t i = 0; i < m; ++i) {
            if (map_[i].size() != portfolios_[i].size()) {
                throw DataError("hierarchy: sector " + std::to_string(i) +
                                " map size does not match its portfolio");
            }
            for (std::size_t idx : map_[i]) {
                if (idx >= n_) throw DataError("hierarchy: stock index out of range");
                if (used[idx]) {
                    throw DataError("hierarchy: overlapping sectors at stock " +
                                    std::to_string(idx));
                }
                used[idx] = true;
            }
        }
    }

    std::size_t n_sectors() const { return lambda_.size(); }
    std::size_t universe_size() const { return n_; }
    const SimplexVector& sector_weights() const { return lambda_; }
    const SimplexVector& sector_portfolio(std::size_t i) const { return portfolios_[i]; }
    const std::vector<std::size_t>& sector_map(std::size_t i) const { return map_[i]; }

    /// Total portfolio over the flat universe: sum_i lambda_i pi_i, padded.
    SimplexVector flatten() const {
        std::vector<double> flat(n_, 0.0);
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            for (std::size_t j = 0; j < map_[i].size(); ++j) {
                flat[map_[i][j]] += lambda_[i] * portfolios_[i][j];
            }
        }
        return SimplexVector(std::move(flat));
    }

    /// Market weights restricted to sector i, renormalized within the sector.
    SimplexVector sector_market(const SimplexVector& mu_flat, std::size_t i) const {
        double total = 0.0;
        for (std::size_t idx : map_[i]) total += mu_flat[idx];
        if (total <= 0.0) {
            throw DataError("hierarchy: sector " + std::to_string(i) +
                            " has zero market weight");
        }
        std::vector<double> w(map_[i].size());
        for (std::size_t j = 0; j < map_[i].size(); ++j) w[j] = mu_flat[map_[i][j]] / total;
        return SimplexVector(std::move(w));
    }

    /// Sector-level market weights (sector capitalization shares).
    SimplexVector sector_level_market(const SimplexVector& mu_flat) const {
        std::vector<double> alpha(lambda_.size(), 0.0);
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            for (std::size_t idx : map_[i]) alpha[i] += mu_flat[idx];
        }
        return SimplexVector(std::move(alpha));
    }

private:
    SimplexVector lambda_;
    std::vector<SimplexVector> portfolios_;
    std::vector<std::vector<std::size_t>> map_;
    std::size_t n_;
};

struct EntropySplit {
    EntropyValue total = EntropyValue::finite(0.0);
    EntropyValue between = EntropyValue::finite(0.0);
    std::vector<EntropyValue> within;
};

/// H(pi|nu) = H(lambda|alpha) + sum_i lambda_i H(pi_i|nu_i), the relative
/// entropy split across hierarchy levels. Infinite components propagate.
inline EntropySplit entropy_chain_rule(const HierarchicalPortfolio& h_pi,
                                       const HierarchicalPortfolio& h_nu) {
    const std::size_t m = h_pi.n_sectors();
    if (h_nu.n_sectors() != m || h_nu.universe_size() != h_pi.universe_size()) {
        throw DataError("entropy_chain_rule: structure mismatch");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (h_pi.sector_map(i) != h_nu.sector_map(i)) {
            throw DataError("entropy_chain_rule: sector maps differ at sector " +
                            std::to_string(i));
        }
    }
    EntropySplit split;
    split.between = relative_entropy(h_pi.sector_weights(), h_nu.sector_weights());
    bool any_infinite = !split.between.is_finite();
    double total = split.between.is_finite() ? split.between.value() : 0.0;
    split.within.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        EntropyValue hi = relative_entropy(h_pi.sector_portfolio(i), h_nu.sector_portfolio(i));
        split.within.push_back(hi);
        if (!hi.is_finite()) {
            if (h_pi.sector_weights()[i] > 0.0) any_infinite = true;
        } else {
            total += h_pi.sector_weights()[i] * hi.value();
        }
    }
    split.total = any_infinite ? EntropyValue::infinite() : EntropyValue::finite(total);
    return split;
}

struct FreeEnergySplit {
    double total = 0.0;
    double sector_level = 0.0;
    std::vector<double> stock_level;
};

/// gamma*(pi) = gamma*(sector mix) + sum_i lambda_i gamma*(pi_i within
/// sector i), the free-energy split. The sector-level term treats the
/// sector portfolios as the assets (their realized log growths); the
/// stock-level parts are free energies within each sector. This is the
/// decomposition that recombines exactly to the flat-universe free energy.
inline FreeEnergySplit energy_chain_rule(const HierarchicalPortfolio& h,
                                         const SimplexVector& mu_flat,
                                         const SimplexVector& mu_next_flat) {
    if (mu_flat.size() != h.universe_size() || mu_next_flat.size() != h.universe_size()) {
        throw DataError("energy_chain_rule: market dimension mismatch");
    }
    if (!mu_flat.strictly_positive() || !mu_next_flat.strictly_positive()) {
        throw DataError("energy_chain_rule: market weights must be strictly positive");
    }
    FreeEnergySplit split;
    std::vector<double> sector_growth(h.n_sectors(), 0.0);
    split.stock_level.reserve(h.n_sectors());
    for (std::size_t i = 0; i < h.n_sectors(); ++i) {
        const auto& map = h.sector_map(i);
        const SimplexVector& pi_i = h.sector_portfolio(i);
        double growth = 0.0;
        double mean_dy = 0.0;
        for (std::size_t j = 0; j < map.size(); ++j) {
            const double ratio = mu_next_flat[map[j]] / mu_flat[map[j]];
            growth += pi_i[j] * ratio;
            if (pi_i[j] > 0.0) mean_dy += pi_i[j] * std::log(ratio);
        }
        sector_growth[i] = std::log(growth);
        // free energy of the sector portfolio over its stocks; the flat
        // market weights serve as the numeraire-consistent prices
        const double g = sector_growth[i] - mean_dy;
        split.stock_level.push_back(g < 0.0 && g > -1e-12 ? 0.0 : g);
    }
    split.sector_level = free_energy_from_log_changes(h.sector_weights(), sector_growth);
    split.total = split.sector_level;
    for (std::size_t i = 0; i < h.n_sectors(); ++i) {
        split.total += h.sector_weights()[i] * split.stock_level[i];
    }
    return split;
}

enum class MixingCase { constant_weights, monotone_rebalancing, none };

inline std::string to_string(MixingCase c) {
    switch (c) {
        case MixingCase::constant_weights: return "constant_weights";
        case MixingCase::monotone_rebalancing: return "monotone_rebalancing";
        case MixingCase::none: return "none";
    }
    return "?";
}

struct MixingCheck {
    MixingCase found = MixingCase::none;
    double delta_drift_total = 0.0; // one-step drift of the flattened portfolio
};

/// Check the sufficient conditions under which mixing energy-entropy sector
/// portfolios preserves the energy-entropy property: (i) constant sector
/// weights, or (ii) sector weights that are themselves energy-entropy and
/// rebalance proportionally toward sectors with higher relative entropy.
/// The caller guarantees the sector portfolios are energy-entropy within
/// their sectors over this step.
inline MixingCheck check_mixing_conditions(const HierarchicalPortfolio& h_t,
                                           const HierarchicalPortfolio& h_next,
                                           const SimplexVector& mu_flat,
                                           const SimplexVector& mu_next_flat) {
    const std::size_t m = h_t.n_sectors();
    if (h_next.n_sectors() != m) throw DataError("check_mixing_conditions: sector mismatch");

    MixingCheck result;
    // Drift of the flattened portfolio over this one step.
    {
        const SimplexVector pi_t = h_t.flatten();
        const SimplexVector pi_next = h_next.flatten();
        const double gamma = free_energy(pi_t, mu_flat, mu_next_flat);
        const double control = relative_entropy(pi_next, mu_next_flat).value() -
                               relative_entropy(pi_t, mu_next_flat).value();
        result.delta_drift_total = gamma + control;
    }

    const SimplexVector& lam_t = h_t.sector_weights();
    const SimplexVector& lam_next = h_next.sector_weights();
    bool constant = true;
    for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(lam_next[i] - lam_t[i]) > 1e-12) constant = false;
    }
    if (constant) {
        result.found = MixingCase::constant_weights;
        return result;
    }

    // Sector-level energy-entropy check for the lambda portfolio: the free
    // energy earned by mixing the sector portfolios, against the entropy
    // spent relative to the sector capitalization shares.
    const SimplexVector alpha_next = h_t.sector_level_market(mu_next_flat);
    const double gamma_sector = energy_chain_rule(h_t, mu_flat, mu_next_flat).sector_level;
    const double control_sector = relative_entropy(lam_next, alpha_next).value() -
                                  relative_entropy(lam_t, alpha_next).value();
    if (gamma_sector + control_sector < -1e-12) {
        result.found = MixingCase::none;
        return result;
    }

    // Monotone rebalancing: growth ratios ordered like the sector entropies.
    std::vector<double> ratio(m), entropy(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (lam_t[i] <= 0.0) throw DataError("check_mixing_conditions: zero sector weight");
        ratio[i] = lam_next[i] / lam_t[i];
        entropy[i] = relative_entropy(h_next.sector_portfolio(i),
                                      h_next.sector_market(mu_next_flat, i))
                         .value();
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (entropy[i] > entropy[j] + 1e-12 && ratio[i] < ratio[j] - 1e-12) {
                result.found = MixingCase::none;
                return result;
            }
        }
    }
    result.found = MixingCase::monotone_rebalancing;
    return result;
}

} // namespace entroport
