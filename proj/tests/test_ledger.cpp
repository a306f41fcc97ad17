#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "entroport/ledger.hpp"
#include "entroport/strategies.hpp"
#include "test_support.hpp"

using namespace entroport;
using test_support::direct_log_wealth_ratio;
using test_support::random_market_path;
using test_support::random_simplex;

TEST_CASE("relative value step") {
    SimplexVector mu_t({0.5, 0.5});
    SimplexVector mu_next({0.6, 0.4});

    // market follows itself: sum of next weights = 1
    CHECK(relative_value_step(mu_t, mu_t, mu_next) == doctest::Approx(1.0).epsilon(1e-15));
    // no price movement
    CHECK(relative_value_step(SimplexVector({0.2, 0.8}), mu_t, mu_t) ==
          doctest::Approx(1.0).epsilon(1e-15));
    // direct evaluation: 0.5*1.2 + 0.5*0.8 = 1, market moved but V did not
    CHECK(relative_value_step(mu_t, mu_t, mu_next) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("free energy: direct value, zero case, numeraire invariance") {
    SimplexVector half({0.5, 0.5});
    // mu unchanged -> 0
    CHECK(free_energy(half, SimplexVector({0.3, 0.7}), SimplexVector({0.3, 0.7})) ==
          doctest::Approx(0.0).epsilon(1e-15));

    // dy = (0.1, 0): ln((e^0.1 + 1)/2) - 0.05
    const double direct = std::log((std::exp(0.1) + 1.0) / 2.0) - 0.05;
    CHECK(free_energy_from_log_changes(half, {0.1, 0.0}) ==
          doctest::Approx(direct).epsilon(1e-13));
    CHECK(direct == doctest::Approx(0.0012495).epsilon(1e-4));

    // computing from raw caps or from weights gives the same value
    Rng rng(3);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 2 + (rng.next_u64() % 6);
        SimplexVector pi = random_simplex(rng, n);
        std::vector<double> caps_t(n), caps_next(n);
        for (std::size_t i = 0; i < n; ++i) {
            caps_t[i] = std::exp(rng.uniform(-1.0, 1.0));
            caps_next[i] = caps_t[i] * std::exp(0.1 * rng.normal());
        }
        auto path = MarketPath::from_caps({caps_t, caps_next});
        std::vector<double> dx(n);
        for (std::size_t i = 0; i < n; ++i) dx[i] = std::log(caps_next[i] / caps_t[i]);
        const double from_mu = free_energy(pi, path.mu(0), path.mu(1));
        const double from_caps = free_energy_from_log_changes(pi, dx);
        CHECK(from_mu == doctest::Approx(from_caps).epsilon(1e-10));
        CHECK(from_mu >= 0.0);
    }
}

TEST_CASE("outperformance horizon") {
    CHECK(outperformance_horizon(1.0, std::exp(-1.0), 0.1) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(outperformance_horizon(1e-300, 1.0, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(outperformance_horizon(2.0, 0.05, 0.05) ==
          doctest::Approx((2.0 + std::log(20.0)) / 0.05).epsilon(1e-12));
    CHECK(outperformance_horizon(2.0, 0.05, 0.05) == doctest::Approx(99.915).epsilon(1e-4));
    CHECK_THROWS_AS(outperformance_horizon(1.0, 0.5, 0.0), DataError);
    CHECK_THROWS_AS(outperformance_horizon(1.0, 0.0, 0.1), DataError);
}

TEST_CASE("ledger: constant-weight control vanishes, market earns nothing") {
    Rng rng(4);
    auto path = random_market_path(rng, 3, 50);

    auto constant = build_ledger(path, make_constant(SimplexVector::uniform(3), 51));
    for (const auto& row : constant.rows) {
        CHECK(std::abs(row.control) < 1e-12);
    }
    CHECK(constant.is_energy_entropy);
    CHECK(constant.is_greedy_entropy);

    auto market = build_ledger(path, make_market(path));
    CHECK(std::abs(market.log_v_total()) < 1e-12);
    for (const auto& row : market.rows) {
        CHECK(std::abs(row.delta_drift) < 1e-12);
    }
}

TEST_CASE("ledger: 50-step random path reproduces the independent wealth oracle") {
    Rng rng(5);
    auto path = random_market_path(rng, 3, 50);
    std::vector<SimplexVector> pi;
    pi.reserve(51);
    for (int t = 0; t <= 50; ++t) pi.push_back(random_simplex(rng, 3));
    auto ledger = build_ledger(path, pi);
    CHECK(ledger.log_v_total() ==
          doctest::Approx(direct_log_wealth_ratio(path, pi)).epsilon(1e-11));
}

TEST_CASE("ledger: telescoping and the cumulative identity over 1000 steps") {
    Rng rng(6);
    auto path = random_market_path(rng, 5, 1000);
    auto pi = run_lambda_strategy(path, 0.4, SimplexVector::uniform(5));
    auto ledger = build_ledger(path, pi);

    CHECK(std::abs(ledger.log_v_total() - direct_log_wealth_ratio(path, pi)) < 1e-9);

    // log V(T) = D(T) + H(pi(0)|mu(0)) - H(pi(T)|mu(T))
    CHECK(ledger.is_energy_entropy);
    CHECK(std::abs(ledger.identity_residual()) < 1e-9);

    double sum = 0.0;
    for (const auto& row : ledger.rows) {
        sum += row.free_energy + row.entropy_change + row.control;
    }
    CHECK(sum == doctest::Approx(ledger.log_v_total()).epsilon(1e-12));
}

TEST_CASE("ledger: guaranteed per-step drift gives the outperformance bound") {
    // zig-zag two-asset path earns fixed free energy each step for the
    // equal-weighted portfolio; log V(T) >= eps*T + log delta
    const std::size_t T = 1000;
    std::vector<std::vector<double>> caps;
    caps.reserve(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
        const double y = (t % 2 == 0) ? 0.0 : 0.1;
        caps.push_back({std::exp(y), 1.0});
    }
    auto path = MarketPath::from_caps(std::move(caps));
    auto ledger = build_ledger(path, make_constant(SimplexVector::uniform(2), T + 1));

    double eps = 1e9, delta = 1.0;
    for (const auto& row : ledger.rows) eps = std::min(eps, row.delta_drift);
    for (std::size_t t = 0; t <= T; ++t) {
        for (std::size_t i = 0; i < 2; ++i) delta = std::min(delta, path.mu(t)[i]);
    }
    CHECK(eps > 0.0);
    CHECK(ledger.log_v_total() >= eps * static_cast<double>(T) + std::log(delta));
    // the horizon formula is consistent with the bound
    const double horizon = outperformance_horizon(0.5, delta, eps);
    CHECK(horizon * eps + std::log(delta) >= 0.5 - 1e-12);
}

TEST_CASE("ledger: infinite entropy aborts with the offending asset named") {
    auto path = MarketPath::from_caps({{1.0, 1.0}, {1.0, 1.0}});
    std::vector<SimplexVector> bad = {SimplexVector({1.0, 0.0}), SimplexVector({1.0, 0.0})};
    CHECK_NOTHROW(build_ledger(path, bad)); // positive market weights: fine

    // direct op errors
    CHECK_THROWS_WITH_AS(detail::entropy_or_throw(SimplexVector({0.5, 0.5}),
                                                  SimplexVector({1.0, 0.0}), 7),
                         doctest::Contains("asset 1"), DataError);
    CHECK_THROWS_AS(build_ledger(path, std::vector<SimplexVector>{SimplexVector({1.0, 0.0})}),
                    DataError);
}

TEST_CASE("ledger csv and jsonl export columns") {
    Rng rng(8);
    auto path = random_market_path(rng, 2, 3);
    auto ledger = build_ledger(path, make_constant(SimplexVector::uniform(2), 4));
    std::ostringstream csv;
    write_ledger_csv(ledger, csv);
    CHECK(csv.str().rfind("t,gamma_star,entropy_change,control,delta_drift,log_v_cum,entropy_level\n",
                          0) == 0);
    std::ostringstream jsonl;
    write_ledger_jsonl(ledger, jsonl);
    const std::string lines = jsonl.str();
    CHECK(lines.find("\"gamma_star\":") != std::string::npos);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 3);
}
