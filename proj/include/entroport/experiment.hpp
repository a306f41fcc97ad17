#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "entroport/config.hpp"
#include "entroport/csv.hpp"
#include "entroport/errors.hpp"
#include "entroport/hierarchy.hpp"
#include "entroport/ledger.hpp"
#include "entroport/strategies.hpp"
#include "entroport/two_asset.hpp"

namespace entroport {

/// Everything needed to replay one experiment deterministically.
struct RunConfig {
    std::string input_path;
    TableMode mode = TableMode::price;
    StrategySpec strategy;
    std::vector<double> mu0;  // price-mode market starting weights; empty = equal
    double sigma = 0.1;       // two-asset grid step
    std::string out_dir = ".";
    std::uint64_t seed = 0;

    static RunConfig from_config(const KeyValueConfig& cfg) {
        RunConfig rc;
        rc.input_path = cfg.get("input");
        const std::string mode = cfg.get_or("mode", "price");
        if (mode == "price") {
            rc.mode = TableMode::price;
        } else if (mode == "capitalization") {
            rc.mode = TableMode::capitalization;
        } else {
            throw DataError("run config: mode must be price or capitalization");
        }
        rc.strategy = strategy_spec_from_config(cfg);
        if (cfg.has("mu0")) rc.mu0 = cfg.get_doubles("mu0");
        rc.sigma = cfg.get_double_or("sigma", 0.1);
        if (!(rc.sigma > 0.0)) throw DataError("run config: sigma must be positive");
        rc.out_dir = cfg.get_or("out", ".");
        rc.seed = static_cast<std::uint64_t>(cfg.get_long_or("seed", 0));
        return rc;
    }
};

struct ExperimentResult {
    DecompositionLedger ledger;
    std::vector<std::string> written_files;
    double log_v_total = 0.0;
    double drift_total = 0.0;
};

namespace detail {

inline void write_weights_csv(const MarketPath& path, const std::vector<SimplexVector>& pi,
                              const std::vector<std::string>& tickers, std::ostream& out) {
    out << "t";
    for (std::size_t i = 0; i < path.n_assets(); ++i) {
        out << ',' << (i < tickers.size() ? tickers[i] : "asset" + std::to_string(i));
    }
    out << '\n';
    char buf[64];
    for (std::size_t t = 0; t < path.n_times(); ++t) {
        out << path.label(t);
        for (std::size_t i = 0; i < path.n_assets(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", pi[t][i]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace detail

/// Run one strategy over one market path from a table; write the ledger,
/// the weights over time, the two-asset match tally when applicable, and a
/// summary JSON whose decomposition identity is verified to 1e-9.
/// Identical configs produce byte-identical outputs.
inline ExperimentResult run_experiment(const RunConfig& config) {
    const PriceTable table = ingest_csv_file(config.input_path, config.mode);
    const MarketPath path = to_market_path(table, config.mu0);
    const std::vector<SimplexVector> pi = run_strategy(config.strategy, path);
    ExperimentResult result;
    result.ledger = build_ledger(path, pi);
    result.log_v_total = result.ledger.log_v_total();
    result.drift_total = result.ledger.drift_total();

    const double residual = result.ledger.identity_residual();
    if (std::abs(residual) > 1e-9) {
        throw IdentityError("experiment: decomposition identity residual " +
                            std::to_string(residual) + " exceeds 1e-9");
    }

    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(config.out_dir) / name).string();
    };

    {
        std::ofstream out(out_path("ledger.csv"));
        write_ledger_csv(result.ledger, out);
        result.written_files.push_back(out_path("ledger.csv"));
    }
    {
        std::ofstream out(out_path("ledger.jsonl"));
        write_ledger_jsonl(result.ledger, out);
        result.written_files.push_back(out_path("ledger.jsonl"));
    }
    {
        std::ofstream out(out_path("weights.csv"));
        detail::write_weights_csv(path, pi, table.tickers, out);
        result.written_files.push_back(out_path("weights.csv"));
    }
    if (path.n_assets() == 2) {
        std::vector<double> y(path.n_times());
        for (std::size_t t = 0; t < path.n_times(); ++t) {
            y[t] = std::log(path.caps(t)[0] / path.caps(t)[1]);
        }
        const BinaryPath grid_path = discretize_to_grid(y, config.sigma);
        const MatchTally tally = tally_matches(grid_path);
        std::ofstream out(out_path("match_tally.csv"));
        write_tally_csv(tally, out);
        result.written_files.push_back(out_path("match_tally.csv"));
    }
    {
        nlohmann::ordered_json summary;
        summary["log_v_T"] = result.log_v_total;
        summary["drift_T"] = result.drift_total;
        summary["entropy_initial"] = result.ledger.initial_entropy;
        summary["entropy_final"] = result.ledger.final_entropy;
        summary["identity_residual"] = residual;
        summary["is_energy_entropy"] = result.ledger.is_energy_entropy;
        summary["is_greedy_entropy"] = result.ledger.is_greedy_entropy;
        summary["n_times"] = path.n_times();
        summary["n_assets"] = path.n_assets();
        summary["dropped_dates"] = table.dropped_dates;
        summary["seed"] = config.seed;
        summary["strategy_kind"] = to_string(config.strategy.kind);
        summary["lambda"] = config.strategy.lambda;
        std::ofstream out(out_path("summary.json"));
        out << summary.dump(2) << '\n';
        result.written_files.push_back(out_path("summary.json"));
    }
    return result;
}

/// Hierarchy description in the shared key-value format:
///   sector  = <name>
///   weight  = <lambda_i>
///   members = TICKER:weight, TICKER:weight, ...
/// Each `sector` line starts a new block; tickers resolve against the given
/// universe order.
inline HierarchicalPortfolio hierarchy_from_config(const KeyValueConfig& cfg,
                                                   const std::vector<std::string>& universe) {
    struct Block {
        std::string name;
        double weight = -1.0;
        std::vector<std::pair<std::string, double>> members;
    };
    std::vector<Block> blocks;
    for (const auto& [key, value] : cfg.entries()) {
        if (key == "sector") {
            blocks.push_back({value, -1.0, {}});
        } else if (key == "weight") {
            if (blocks.empty()) throw DataError("hierarchy file: weight before any sector");
            blocks.back().weight = std::stod(value);
        } else if (key == "members") {
            if (blocks.empty()) throw DataError("hierarchy file: members before any sector");
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = KeyValueConfig::trim(item);
                const auto colon = item.find(':');
                if (colon == std::string::npos) {
                    throw DataError("hierarchy file: member entries must be TICKER:weight");
                }
                blocks.back().members.emplace_back(
                    KeyValueConfig::trim(item.substr(0, colon)),
                    std::stod(item.substr(colon + 1)));
            }
        } else {
            throw DataError("hierarchy file: unexpected key '" + key + "'");
        }
    }
    if (blocks.empty()) throw DataError("hierarchy file: no sectors");

    std::vector<double> lambda;
    std::vector<SimplexVector> portfolios;
    std::vector<std::vector<std::size_t>> maps;
    for (const auto& block : blocks) {
        if (block.weight < 0.0) {
            throw DataError("hierarchy file: sector '" + block.name + "' has no weight");
        }
        if (block.members.empty()) {
            throw DataError("hierarchy file: sector '" + block.name + "' has no members");
        }
        lambda.push_back(block.weight);
        std::vector<double> w;
        std::vector<std::size_t> map;
        for (const auto& [ticker, weight] : block.members) {
            const auto it = std::find(universe.begin(), universe.end(), ticker);
            if (it == universe.end()) {
                throw DataError("hierarchy file: ticker '" + ticker + "' not in universe");
            }
            map.push_back(static_cast<std::size_t>(it - universe.begin()));
            w.push_back(weight);
        }
        portfolios.emplace_back(std::move(w));
        maps.push_back(std::move(map));
    }
    return HierarchicalPortfolio(SimplexVector(std::move(lambda)), std::move(portfolios),
                                 std::move(maps), universe.size());
}

} // namespace entroport
