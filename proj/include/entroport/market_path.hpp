#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/simplex.hpp"

namespace entroport {

/// Time-indexed series of positive capitalizations with the derived market
/// weights. Labels are opaque ordered tags (dates in file-driven runs);
/// only their order matters.
class MarketPath {
public:
    static MarketPath from_caps(std::vector<std::vector<double>> caps,
                                std::vector<std::string> labels = {}) {
        if (caps.empty()) throw DataError("market path needs at least one time point");
        const std::size_t n = caps.front().size();
        if (n == 0) throw DataError("market path needs at least one asset");
        std::vector<SimplexVector> weights;
        weights.reserve(caps.size());
        for (std::size_t t = 0; t < caps.size(); ++t) {
            if (caps[t].size() != n) {
                throw DataError("market path: ragged capitalizations at index " +
                                std::to_string(t));
            }
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = caps[t][i];
                if (!(x > 0.0) || !std::isfinite(x)) {
                    throw DataError("market path: nonpositive capitalization at t=" +
                                    std::to_string(t) + " asset " + std::to_string(i));
                }
                sum += x;
            }
            std::vector<double> mu(n);
            for (std::size_t i = 0; i < n; ++i) mu[i] = caps[t][i] / sum;
            weights.emplace_back(std::move(mu));
        }
        if (!labels.empty() && labels.size() != caps.size()) {
            throw DataError("market path: label count does not match time count");
        }
        return MarketPath(std::move(caps), std::move(weights), std::move(labels));
    }

    /// Build from market-weight rows directly (unit total capitalization).
    static MarketPath from_weights(const std::vector<std::vector<double>>& weight_rows,
                                   std::vector<std::string> labels = {}) {
        return from_caps(weight_rows, std::move(labels));
    }

    std::size_t n_times() const { return weights_.size(); }
    std::size_t n_assets() const { return weights_.front().size(); }

    const SimplexVector& mu(std::size_t t) const { return weights_[t]; }
    const std::vector<double>& caps(std::size_t t) const { return caps_[t]; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::string label(std::size_t t) const {
        return labels_.empty() ? std::to_string(t) : labels_[t];
    }

private:
    MarketPath(std::vector<std::vector<double>> caps, std::vector<SimplexVector> weights,
               std::vector<std::string> labels)
        : caps_(std::move(caps)), weights_(std::move(weights)), labels_(std::move(labels)) {}

    std::vector<std::vector<double>> caps_;
    std::vector<SimplexVector> weights_;
    std::vector<std::string> labels_;
};

} // namespace entroport
