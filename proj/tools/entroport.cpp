// Command-line front end: experiment runs, ledger decomposition, two-asset
// match tallies, weight-curve optimization, and local-time simulation.
// Exit codes: 0 success, 2 data/config errors, 3 identity-check failures.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entroport/config.hpp"
#include "entroport/csv.hpp"
#include "entroport/diffusion.hpp"
#include "entroport/errors.hpp"
#include "entroport/experiment.hpp"
#include "entroport/ledger.hpp"
#include "entroport/report.hpp"
#include "entroport/strategies.hpp"
#include "entroport/two_asset.hpp"
#include "entroport/variational.hpp"

namespace {

using namespace entroport;

KeyValueConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    return KeyValueConfig::parse(in);
}

std::filesystem::path ensure_out_dir(const std::string& out) {
    std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    return dir;
}

TableMode mode_from_string(const std::string& mode) {
    if (mode == "price") return TableMode::price;
    if (mode == "capitalization") return TableMode::capitalization;
    throw DataError("mode must be price or capitalization");
}

int cmd_run(const std::string& config_path, const std::string& input_override,
            double lambda_override, double sigma_override, long seed_override,
            const std::string& out_override) {
    KeyValueConfig cfg = load_config(config_path);
    RunConfig rc = RunConfig::from_config(cfg);
    if (!input_override.empty()) rc.input_path = input_override;
    if (lambda_override >= 0.0) rc.strategy.lambda = lambda_override;
    if (sigma_override > 0.0) rc.sigma = sigma_override;
    if (seed_override >= 0) rc.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) rc.out_dir = out_override;
    ExperimentResult result = run_experiment(rc);
    std::cout << "log V(T) = " << result.log_v_total << ", D(T) = " << result.drift_total
              << "\n";
    for (const auto& file : result.written_files) std::cout << "wrote " << file << "\n";
    return 0;
}

int cmd_decompose(const std::string& input, const std::string& mode,
                  const std::string& strategy_path, double lambda, const std::string& out) {
    PriceTable table = ingest_csv_file(input, mode_from_string(mode));
    MarketPath path = to_market_path(table);
    StrategySpec spec;
    if (!strategy_path.empty()) {
        spec = strategy_spec_from_config(load_config(strategy_path));
    } else {
        spec = StrategySpec::lambda_rebalance(lambda < 0.0 ? 0.0 : lambda);
    }
    auto pi = run_strategy(spec, path);
    auto ledger = build_ledger(path, pi);

    const auto dir = ensure_out_dir(out);
    {
        std::ofstream os(dir / "ledger.csv");
        write_ledger_csv(ledger, os);
    }
    {
        std::ofstream os(dir / "ledger.jsonl");
        write_ledger_jsonl(ledger, os);
    }
    std::cout << "log V(T) = " << ledger.log_v_total() << ", D(T) = " << ledger.drift_total()
              << ", H0 = " << ledger.initial_entropy << ", HT = " << ledger.final_entropy
              << "\n";
    std::cout << "energy-entropy: " << (ledger.is_energy_entropy ? "yes" : "no")
              << ", greedy-entropy: " << (ledger.is_greedy_entropy ? "yes" : "no") << "\n";
    std::cout << "wrote " << (dir / "ledger.csv").string() << "\n";
    if (std::abs(ledger.identity_residual()) > 1e-9) {
        throw IdentityError("decomposition identity residual exceeds 1e-9");
    }
    return 0;
}

int cmd_match(const std::string& input, double sigma, const std::string& out) {
    PriceTable table = ingest_csv_file(input, TableMode::price);
    if (table.tickers.size() != 2) {
        throw DataError("match needs exactly two tickers; got " +
                        std::to_string(table.tickers.size()));
    }
    std::vector<double> y(table.values.size());
    for (std::size_t t = 0; t < table.values.size(); ++t) {
        y[t] = std::log(table.values[t][0] / table.values[t][1]);
    }
    BinaryPath path = discretize_to_grid(y, sigma);
    MatchTally tally = tally_matches(path);

    const auto dir = ensure_out_dir(out);
    {
        std::ofstream os(dir / "match_tally.csv");
        write_tally_csv(tally, os);
    }
    {
        std::ofstream os(dir / "binary_path.txt");
        write_binary_path(path, os);
    }
    std::cout << "steps = " << path.steps.size() << ", matches = " << tally.total_matches
              << ", unmatched = " << tally.unmatched_count << "\n";
    std::cout << "wrote " << (dir / "match_tally.csv").string() << "\n";
    return 0;
}

int cmd_optimize(const std::string& w_kind, double gamma, double floor, double ratio_a,
                 double ratio_b, const std::string& out) {
    WeightFunction w = (w_kind == "bang_bang") ? WeightFunction::bang_bang(gamma)
                       : (w_kind == "ou")      ? WeightFunction::ou(gamma)
                                               : throw DataError("w must be bang_bang or ou");
    ConstraintSet constraints;
    constraints.q_floor = floor;
    if (ratio_a > 0.0 || ratio_b > 0.0) {
        constraints.ratio = {{ratio_a, ratio_b}};
    }
    OptimalCurve opt = optimal_weight_curve(w, constraints);
    nlohmann::ordered_json report = premium_report_json(w.kind(), gamma, constraints, opt);

    const auto dir = ensure_out_dir(out);
    std::ofstream os(dir / "optimize.json");
    os << report.dump(2) << '\n';
    std::cout << "lambda_eq_weight = " << opt.equal_weight_value
              << ", lambda_optimal = " << opt.value << "\n";
    std::cout << "wrote " << (dir / "optimize.json").string() << "\n";
    return 0;
}

int cmd_localtime(const std::string& kind, double alpha, double sigma, double h, double eps,
                  long n_paths, const std::string& levels_text, long seed,
                  const std::string& out) {
    DiffusionSpec spec = (kind == "bang_bang") ? DiffusionSpec::bang_bang(alpha, sigma, h, eps)
                       : (kind == "ou")        ? DiffusionSpec::ou(alpha, sigma, h, eps)
                                               : throw DataError("kind must be bang_bang or ou");
    std::vector<double> levels;
    {
        std::stringstream ss(levels_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            levels.push_back(std::stod(KeyValueConfig::trim(item)));
        }
    }
    if (levels.empty()) throw DataError("localtime: no levels given");
    if (n_paths < 1) throw DataError("localtime: need at least one path");

    auto profile = simulate_local_time_profile(spec, levels, static_cast<std::size_t>(n_paths),
                                               static_cast<std::uint64_t>(seed));
    const auto dir = ensure_out_dir(out);
    std::ofstream os(dir / "local_time.csv");
    write_profile_csv(profile, os);
    for (std::size_t i = 0; i < profile.levels.size(); ++i) {
        std::cout << "y = " << profile.levels[i] << ": " << profile.estimates[i] << " +- "
                  << profile.stderrs[i]
                  << " (expected " << expected_local_time(spec, profile.levels[i]) << ")\n";
    }
    if (profile.budget_breaches > 0) {
        std::cout << profile.budget_breaches << " paths exceeded the time budget\n";
    }
    std::cout << "wrote " << (dir / "local_time.csv").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-entropy rebalancing portfolio engine"};
    app.require_subcommand(1);

    std::string config_path, input, out = ".", mode = "price", strategy_path;
    std::string run_input, run_out;
    double run_lambda = -1.0, run_sigma = -1.0;
    double lambda = -1.0, sigma = 0.1, gamma = 1.0, floor = 0.0;
    double ratio_a = 0.0, ratio_b = 0.0, alpha = 1.0, dsigma = 1.0, h = 1e-4, eps = 0.02;
    long seed = -1, n_paths = 10000;
    std::string w_kind = "bang_bang", dkind = "bang_bang", levels = "0.25,0.5,1.0";

    auto* run = app.add_subcommand("run", "run a configured experiment and write the bundle");
    run->add_option("--config", config_path, "run config file")->required();
    run->add_option("--input", run_input, "override the input CSV");
    run->add_option("--lambda", run_lambda, "override the strategy lambda");
    run->add_option("--sigma", run_sigma, "override the two-asset grid step");
    run->add_option("--seed", seed, "override the seed");
    run->add_option("--out", run_out, "override the output directory");

    auto* decompose = app.add_subcommand("decompose", "ledger decomposition of one strategy");
    decompose->add_option("--input", input, "price CSV (date,ticker,value)")->required();
    decompose->add_option("--mode", mode, "price or capitalization");
    decompose->add_option("--config", strategy_path, "strategy spec file");
    decompose->add_option("--lambda", lambda, "lambda strategy shortcut");
    decompose->add_option("--out", out, "output directory");

    auto* match = app.add_subcommand("match", "two-asset match tally on the log price ratio");
    match->add_option("--input", input, "price CSV with exactly two tickers")->required();
    match->add_option("--sigma", sigma, "grid step");
    match->add_option("--out", out, "output directory");

    auto* optimize = app.add_subcommand("optimize", "optimal weight curve for a local-time weight");
    optimize->add_option("--w", w_kind, "bang_bang or ou");
    optimize->add_option("--gamma", gamma, "weight decay parameter")->required();
    optimize->add_option("--floor", floor, "lower bound on the first weight");
    optimize->add_option("--ratio-a", ratio_a, "lower weight-ratio bound A");
    optimize->add_option("--ratio-b", ratio_b, "upper weight-ratio bound B");
    optimize->add_option("--out", out, "output directory");

    auto* localtime = app.add_subcommand("localtime", "expected local time by simulation");
    localtime->add_option("--kind", dkind, "bang_bang or ou");
    localtime->add_option("--alpha", alpha, "pull strength");
    localtime->add_option("--vol", dsigma, "diffusion volatility");
    localtime->add_option("--step", h, "Euler step");
    localtime->add_option("--eps", eps, "level window half-width");
    localtime->add_option("--paths", n_paths, "number of paths");
    localtime->add_option("--levels", levels, "comma-separated levels");
    localtime->add_option("--seed", seed, "stream seed");
    localtime->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, run_input, run_lambda, run_sigma, seed, run_out);
        }
        if (decompose->parsed()) {
            return cmd_decompose(input, mode, strategy_path, lambda, out);
        }
        if (match->parsed()) {
            return cmd_match(input, sigma, out);
        }
        if (optimize->parsed()) {
            return cmd_optimize(w_kind, gamma, floor, ratio_a, ratio_b, out);
        }
        if (localtime->parsed()) {
            return cmd_localtime(dkind, alpha, dsigma, h, eps, n_paths, levels,
                                 seed < 0 ? 0 : seed, out);
        }
    } catch (const IdentityError& e) {
        std::cerr << "identity check failed: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
