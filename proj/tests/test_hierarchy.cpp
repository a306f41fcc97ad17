#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "entroport/config.hpp"
#include "entroport/experiment.hpp"
#include "entroport/hierarchy.hpp"
#include "test_support.hpp"

using namespace entroport;
using test_support::random_simplex;

namespace {

// Random disjoint two-level structure over a flat universe.
HierarchicalPortfolio random_hierarchy(Rng& rng, std::size_t m, std::vector<std::size_t> sizes) {
    std::size_t n = 0;
    for (auto s : sizes) n += s;
    std::vector<SimplexVector> portfolios;
    std::vector<std::vector<std::size_t>> maps;
    std::size_t next = 0;
    for (std::size_t i = 0; i < m; ++i) {
        portfolios.push_back(random_simplex(rng, sizes[i]));
        std::vector<std::size_t> map(sizes[i]);
        for (std::size_t j = 0; j < sizes[i]; ++j) map[j] = next++;
        maps.push_back(map);
    }
    return HierarchicalPortfolio(random_simplex(rng, m), std::move(portfolios), std::move(maps), n);
}

HierarchicalPortfolio with_weights(const HierarchicalPortfolio& h, const SimplexVector& lambda,
                                   std::vector<SimplexVector> portfolios) {
    std::vector<std::vector<std::size_t>> maps;
    for (std::size_t i = 0; i < h.n_sectors(); ++i) maps.push_back(h.sector_map(i));
    return HierarchicalPortfolio(lambda, std::move(portfolios), std::move(maps),
                                 h.universe_size());
}

} // namespace

TEST_CASE("flatten: single sector, two singles, random sums to one") {
    HierarchicalPortfolio single(SimplexVector({1.0}), {SimplexVector({0.3, 0.7})}, {{0, 1}}, 2);
    SimplexVector flat = single.flatten();
    CHECK(flat[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(flat[1] == doctest::Approx(0.7).epsilon(1e-15));

    HierarchicalPortfolio pair(SimplexVector({0.5, 0.5}),
                               {SimplexVector({1.0}), SimplexVector({1.0})}, {{0}, {1}}, 2);
    SimplexVector flat2 = pair.flatten();
    CHECK(flat2[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flat2[1] == doctest::Approx(0.5).epsilon(1e-15));

    Rng rng(31);
    auto h = random_hierarchy(rng, 3, {2, 3, 2});
    SimplexVector flat3 = h.flatten();
    double sum = 0.0;
    for (std::size_t i = 0; i < flat3.size(); ++i) sum += flat3[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

    // overlapping sectors rejected
    CHECK_THROWS_AS(HierarchicalPortfolio(SimplexVector({0.5, 0.5}),
                                          {SimplexVector({1.0}), SimplexVector({1.0})},
                                          {{0}, {0}}, 2),
                    DataError);
}

TEST_CASE("entropy chain rule: degenerate cases and the flat oracle") {
    Rng rng(32);
    auto h = random_hierarchy(rng, 3, {2, 3, 2});

    // identical hierarchies: all parts zero
    auto split0 = entropy_chain_rule(h, h);
    CHECK(split0.total.value() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(split0.between.value() == doctest::Approx(0.0).epsilon(1e-14));

    // same sector portfolios, different sector weights: pure between term
    std::vector<SimplexVector> same = {h.sector_portfolio(0), h.sector_portfolio(1),
                                       h.sector_portfolio(2)};
    auto h2 = with_weights(h, random_simplex(rng, 3), same);
    auto split1 = entropy_chain_rule(h2, h);
    CHECK(split1.total.value() ==
          doctest::Approx(relative_entropy(h2.sector_weights(), h.sector_weights()).value())
              .epsilon(1e-12));
    for (const auto& w : split1.within) CHECK(w.value() == doctest::Approx(0.0).epsilon(1e-14));

    // random instance vs the flat-universe oracle
    auto h_nu = random_hierarchy(rng, 3, {2, 3, 2});
    auto split2 = entropy_chain_rule(h, h_nu);
    const double flat = relative_entropy(h.flatten(), h_nu.flatten()).value();
    double recombined = split2.between.value();
    for (std::size_t i = 0; i < 3; ++i) {
        recombined += h.sector_weights()[i] * split2.within[i].value();
    }
    CHECK(split2.total.value() == doctest::Approx(flat).epsilon(1e-11));
    CHECK(recombined == doctest::Approx(flat).epsilon(1e-11));
}

TEST_CASE("energy chain rule: degenerate cases and the flat oracle") {
    Rng rng(33);

    // single sector: sector level is zero
    auto h1 = random_hierarchy(rng, 1, {4});
    SimplexVector mu_t = random_simplex(rng, 4);
    SimplexVector mu_next = random_simplex(rng, 4);
    auto split1 = energy_chain_rule(h1, mu_t, mu_next);
    CHECK(split1.sector_level == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(split1.total == doctest::Approx(split1.stock_level[0]).epsilon(1e-12));

    // singleton sectors: stock level is zero
    auto h2 = random_hierarchy(rng, 3, {1, 1, 1});
    SimplexVector mu3_t = random_simplex(rng, 3);
    SimplexVector mu3_next = random_simplex(rng, 3);
    auto split2 = energy_chain_rule(h2, mu3_t, mu3_next);
    for (double g : split2.stock_level) CHECK(g == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(split2.total == doctest::Approx(split2.sector_level).epsilon(1e-12));

    // random 2-sector, 2+3 stocks vs flat free energy
    auto h3 = random_hierarchy(rng, 2, {2, 3});
    SimplexVector mu5_t = random_simplex(rng, 5);
    SimplexVector mu5_next = random_simplex(rng, 5);
    auto split3 = energy_chain_rule(h3, mu5_t, mu5_next);
    const double flat = free_energy(h3.flatten(), mu5_t, mu5_next);
    CHECK(split3.total == doctest::Approx(flat).epsilon(1e-11));
}

TEST_CASE("both chain rules hold on 1000 random hierarchies") {
    Rng rng(34);
    double worst_entropy = 0.0, worst_energy = 0.0;
    for (int it = 0; it < 1000; ++it) {
        const std::size_t m = 2 + (rng.next_u64() % 3);
        std::vector<std::size_t> sizes(m);
        std::size_t n = 0;
        for (auto& s : sizes) {
            s = 1 + (rng.next_u64() % 4);
            n += s;
        }
        auto h_pi = random_hierarchy(rng, m, sizes);
        auto h_nu = random_hierarchy(rng, m, sizes);
        const double flat_h = relative_entropy(h_pi.flatten(), h_nu.flatten()).value();
        worst_entropy = std::max(
            worst_entropy, std::abs(entropy_chain_rule(h_pi, h_nu).total.value() - flat_h));

        SimplexVector mu_t = random_simplex(rng, n);
        SimplexVector mu_next = random_simplex(rng, n);
        const double flat_g = free_energy(h_pi.flatten(), mu_t, mu_next);
        worst_energy = std::max(
            worst_energy, std::abs(energy_chain_rule(h_pi, mu_t, mu_next).total - flat_g));
    }
    CHECK(worst_entropy < 1e-10);
    CHECK(worst_energy < 1e-10);
}

TEST_CASE("infinite within-sector entropy propagates") {
    HierarchicalPortfolio h_pi(SimplexVector({0.5, 0.5}),
                               {SimplexVector({1.0, 0.0}), SimplexVector({1.0})}, {{0, 1}, {2}},
                               3);
    HierarchicalPortfolio h_nu(SimplexVector({0.5, 0.5}),
                               {SimplexVector({0.0, 1.0}), SimplexVector({1.0})}, {{0, 1}, {2}},
                               3);
    auto split = entropy_chain_rule(h_pi, h_nu);
    CHECK(!split.total.is_finite());
}

TEST_CASE("mixing check: constant weights") {
    Rng rng(35);
    auto h_t = random_hierarchy(rng, 2, {2, 2});
    // constant-weighted within sectors and constant sector weights
    auto h_next = with_weights(h_t, h_t.sector_weights(),
                               {h_t.sector_portfolio(0), h_t.sector_portfolio(1)});
    SimplexVector mu_t = random_simplex(rng, 4);
    SimplexVector mu_next = random_simplex(rng, 4);
    auto check = check_mixing_conditions(h_t, h_next, mu_t, mu_next);
    CHECK(check.found == MixingCase::constant_weights);
    CHECK(check.delta_drift_total >= -1e-10);
}

TEST_CASE("mixing check: monotone rebalancing toward higher-entropy sectors") {
    // two sectors of two stocks; within-sector portfolios constant (hence
    // energy-entropy); sector weights tilt toward the sector with higher
    // relative entropy while sector capitalizations stay flat
    std::vector<SimplexVector> pis = {SimplexVector({0.9, 0.1}), SimplexVector({0.5, 0.5})};
    HierarchicalPortfolio h_t(SimplexVector({0.5, 0.5}), pis, {{0, 1}, {2, 3}}, 4);
    HierarchicalPortfolio h_next(SimplexVector({0.6, 0.4}), pis, {{0, 1}, {2, 3}}, 4);

    // within-sector rebalance of market weights keeps sector sums at 0.5
    SimplexVector mu_t({0.25, 0.25, 0.25, 0.25});
    SimplexVector mu_next({0.3, 0.2, 0.2, 0.3});

    // sector 0 entropy is higher, and lambda ratio 1.2 > 0.8 favors it
    const double h0 = relative_entropy(h_next.sector_portfolio(0),
                                       h_next.sector_market(mu_next, 0))
                          .value();
    const double h1 = relative_entropy(h_next.sector_portfolio(1),
                                       h_next.sector_market(mu_next, 1))
                          .value();
    REQUIRE(h0 > h1);

    auto check = check_mixing_conditions(h_t, h_next, mu_t, mu_next);
    CHECK(check.found == MixingCase::monotone_rebalancing);
    CHECK(check.delta_drift_total >= -1e-10);

    // the covariance term in the proof is nonnegative under the condition
    double cov = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double hi = relative_entropy(h_next.sector_portfolio(i),
                                           h_next.sector_market(mu_next, i))
                              .value();
        cov += (h_next.sector_weights()[i] - h_t.sector_weights()[i]) * hi;
    }
    CHECK(cov >= -1e-12);
}

TEST_CASE("mixing check: adversarial weights fall in no case") {
    std::vector<SimplexVector> pis = {SimplexVector({0.9, 0.1}), SimplexVector({0.5, 0.5})};
    HierarchicalPortfolio h_t(SimplexVector({0.5, 0.5}), pis, {{0, 1}, {2, 3}}, 4);
    // tilt away from the higher-entropy sector: violates monotonicity
    HierarchicalPortfolio h_next(SimplexVector({0.4, 0.6}), pis, {{0, 1}, {2, 3}}, 4);
    SimplexVector mu_t({0.25, 0.25, 0.25, 0.25});
    SimplexVector mu_next({0.3, 0.2, 0.2, 0.3});
    auto check = check_mixing_conditions(h_t, h_next, mu_t, mu_next);
    CHECK(check.found == MixingCase::none);
    // sufficient, not necessary: no drift claim is made either way
}

TEST_CASE("hierarchy description file loads against a universe") {
    std::istringstream file("sector = tech\n"
                            "weight = 0.6\n"
                            "members = AAA:0.5, BBB:0.5\n"
                            "sector = energy\n"
                            "weight = 0.4\n"
                            "members = CCC:1.0\n");
    auto cfg = KeyValueConfig::parse(file);
    auto h = hierarchy_from_config(cfg, {"AAA", "BBB", "CCC"});
    CHECK(h.n_sectors() == 2);
    CHECK(h.sector_weights()[0] == doctest::Approx(0.6).epsilon(1e-15));
    SimplexVector flat = h.flatten();
    CHECK(flat[2] == doctest::Approx(0.4).epsilon(1e-15));

    std::istringstream missing("sector = tech\nmembers = AAA:1.0\n");
    CHECK_THROWS_AS(hierarchy_from_config(KeyValueConfig::parse(missing), {"AAA"}), DataError);
    std::istringstream unknown("sector = tech\nweight = 1.0\nmembers = ZZZ:1.0\n");
    CHECK_THROWS_AS(hierarchy_from_config(KeyValueConfig::parse(unknown), {"AAA"}), DataError);
}
