#include <cmath>
#include <vector>

#include <doctest.h>

#include "entroport/curve.hpp"
#include "entroport/report.hpp"
#include "entroport/variational.hpp"
#include "test_support.hpp"

using namespace entroport;

namespace {

// admissible random piecewise-linear curve: in [0,1], q(0) = 1/2, within
// the constraint band
WeightCurve random_admissible(Rng& rng, const ConstraintSet& c = {}) {
    std::vector<double> ys, qs;
    for (double y = -6.0; y <= 6.0 + 1e-9; y += 0.5) {
        ys.push_back(y);
        double lo = c.lower_bound(y), hi = c.upper_bound(y);
        double q = (y == 0.0) ? 0.5 : rng.uniform(lo, hi);
        qs.push_back(std::min(hi, std::max(lo, q)));
    }
    return WeightCurve::piecewise_linear(ys, qs);
}

// independent oracle: coordinate-ascent over piecewise-linear curves with a
// plain Riemann evaluation of the reported-scale functional
double grid_search_oracle(const WeightFunction& w, double y_lo, double y_hi, int n_knots,
                          int sweeps) {
    std::vector<double> ys(n_knots), qs(n_knots, 0.5);
    for (int i = 0; i < n_knots; ++i) {
        ys[i] = y_lo + (y_hi - y_lo) * i / (n_knots - 1.0);
    }
    const int zero_knot = static_cast<int>(std::round(-y_lo / (y_hi - y_lo) * (n_knots - 1)));

    auto evaluate = [&](const std::vector<double>& q) {
        // Riemann sum of q(1-q) w + q w' on a fine grid, plus the origin term
        const int m = 8000;
        double total = 2.0 * w(0.0) * 0.5;
        const double h = (y_hi - y_lo) / m;
        for (int i = 0; i < m; ++i) {
            const double y = y_lo + (i + 0.5) * h;
            // linear interpolation of the knot values
            const double pos = (y - y_lo) / (y_hi - y_lo) * (n_knots - 1);
            const int k = std::min(n_knots - 2, static_cast<int>(pos));
            const double t = pos - k;
            const double qv = q[k] + t * (q[k + 1] - q[k]);
            total += (qv * (1.0 - qv) * w(y) + qv * w.derivative(y)) * h;
        }
        return total;
    };

    double best = evaluate(qs);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int i = 0; i < n_knots; ++i) {
            if (i == zero_knot) continue; // q(0) = 1/2 pinned
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double m1 = lo + (hi - lo) / 3.0;
                const double m2 = hi - (hi - lo) / 3.0;
                qs[i] = m1;
                const double f1 = evaluate(qs);
                qs[i] = m2;
                const double f2 = evaluate(qs);
                if (f1 > f2) {
                    hi = m2;
                    qs[i] = m1;
                } else {
                    lo = m1;
                }
            }
            qs[i] = 0.5 * (lo + hi);
        }
        best = evaluate(qs);
    }
    return best;
}

} // namespace

TEST_CASE("weight functions: values, integrability, tabulated interpolation") {
    auto bb = WeightFunction::bang_bang(0.5);
    CHECK(bb(0.0) == 1.0);
    CHECK(bb(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(bb.total_mass() == doctest::Approx(4.0).epsilon(1e-9));

    auto ou = WeightFunction::ou(1.0);
    CHECK(ou.total_mass() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));

    auto tab = WeightFunction::tabulated({-1.0, 0.0, 1.0}, {0.0, 2.0, 0.0});
    CHECK(tab(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(tab(3.0) == 0.0);
    CHECK_THROWS_AS(WeightFunction::tabulated({0.0, 1.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(WeightFunction::bang_bang(0.0), DataError);
}

TEST_CASE("premium functional: closed forms for the equal-weighted curve") {
    WeightCurve half = WeightCurve::constant(0.5);

    // bang-bang: 1/(2 gamma)
    for (double gamma : {0.25, 0.5, 1.0, 2.0}) {
        CHECK(excursion_premium(half, WeightFunction::bang_bang(gamma)) ==
              doctest::Approx(1.0 / (2.0 * gamma)).epsilon(1e-8));
    }

    // ou on the reported scale: 1 + sqrt(pi) / (4 sqrt(gamma))
    for (double gamma : {0.5, 1.0, 2.0}) {
        CHECK(excursion_premium_reported(half, WeightFunction::ou(gamma)) ==
              doctest::Approx(1.0 + std::sqrt(M_PI) / (4.0 * std::sqrt(gamma))).epsilon(1e-8));
    }

    // q = 0: direct functional vanishes for any weight
    WeightCurve zero = WeightCurve::constant(0.0);
    CHECK(excursion_premium(zero, WeightFunction::bang_bang(0.7)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(excursion_premium(zero, WeightFunction::ou(0.7)) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the two evaluation routes differ by exactly the origin term") {
    Rng rng(51);
    auto ou = WeightFunction::ou(0.8);
    for (int it = 0; it < 20; ++it) {
        WeightCurve q = random_admissible(rng);
        const double direct = excursion_premium(q, ou);
        const double reported = excursion_premium_reported(q, ou);
        CHECK(reported - direct == doctest::Approx(2.0 * ou(0.0) * q(0.0)).epsilon(1e-6));
    }
    // C1 decreasing curve: integration-by-parts equivalence to 1e-6
    WeightCurve smooth(
        [](double y) { return 1.0 / (1.0 + std::exp(y)); }, CurveSmoothness::c1,
        [](double y) {
            const double v = 1.0 / (1.0 + std::exp(y));
            return -v * (1.0 - v);
        });
    const double direct = excursion_premium(smooth, ou);
    const double reported = excursion_premium_reported(smooth, ou);
    CHECK(reported - direct == doctest::Approx(2.0 * ou(0.0) * 0.5).epsilon(1e-9));
}

TEST_CASE("optimal curves: bang-bang suprema and the floor constraint") {
    // gamma = 0.5: supremum (1+gamma)^2 / (2 gamma) = 2.25, approached
    // within w(0) * eta by the interpolated optimum
    auto opt = optimal_weight_curve(WeightFunction::bang_bang(0.5));
    CHECK(std::abs(opt.value - 2.25) <= 1.0 * opt.interpolation_width);
    CHECK(opt.q(1.0) == doctest::Approx(0.25).epsilon(1e-12));  // (1-gamma)/2
    CHECK(opt.q(-1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(opt.q(0.0) == doctest::Approx(0.5).epsilon(1e-12));

    // gamma >= 1: supremum 2
    auto opt2 = optimal_weight_curve(WeightFunction::bang_bang(2.0));
    CHECK(std::abs(opt2.value - 2.0) <= 1.0 * opt2.interpolation_width);
    CHECK(opt2.q(0.5) == doctest::Approx(0.0).epsilon(1e-12));

    // floor delta = 0.3 with gamma = 0.8: optimal curve is 0.3 on y > 0
    ConstraintSet floor;
    floor.q_floor = 0.3;
    auto opt3 = optimal_weight_curve(WeightFunction::bang_bang(0.8), floor);
    for (double y : {0.01, 0.5, 2.0, 5.0}) {
        CHECK(opt3.q(y) == doctest::Approx(0.3).epsilon(1e-12));
    }
}

TEST_CASE("optimal curves: ou exact optimum, clamping, ratio constraints") {
    auto ou = WeightFunction::ou(1.0);
    auto opt = optimal_weight_curve(ou);
    // q*(y) = (1 - 2 gamma y)/2 clamped into [0,1]; clamp boundary 1/(2 gamma)
    CHECK(opt.q(0.2) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(opt.q(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(opt.q(0.7) == 0.0);
    CHECK(opt.q(-0.7) == 1.0);
    CHECK(opt.equal_weight_value ==
          doctest::Approx(1.0 + std::sqrt(M_PI) / 4.0).epsilon(1e-8));
    CHECK(opt.value > opt.equal_weight_value);

    // ratio bounds produce the banded optimum
    ConstraintSet band;
    band.ratio = {{0.5, 2.0}};
    auto opt_band = optimal_weight_curve(ou, band);
    for (double y : {-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0}) {
        CHECK(opt_band.q(y) >= band.lower_bound(y) - 1e-12);
        CHECK(opt_band.q(y) <= band.upper_bound(y) + 1e-12);
    }
    // at the consistency point the band contains 1/2
    CHECK(band.lower_bound(0.0) <= 0.5);
    CHECK(band.upper_bound(0.0) >= 0.5);
}

TEST_CASE("ou optimum dominates random admissible curves and matches the grid oracle") {
    Rng rng(52);
    auto ou = WeightFunction::ou(1.0);
    auto opt = optimal_weight_curve(ou);
    for (int it = 0; it < 100; ++it) {
        WeightCurve q = random_admissible(rng);
        CHECK(excursion_premium_reported(q, ou) <= opt.value + 1e-9);
    }
    const double oracle = grid_search_oracle(ou, -4.0, 4.0, 81, 3);
    CHECK(opt.value == doctest::Approx(oracle).epsilon(0.005));
}

TEST_CASE("constrained optimum dominates constrained random curves") {
    Rng rng(53);
    ConstraintSet c;
    c.q_floor = 0.2;
    c.ratio = {{0.6, 1.8}};
    auto ou = WeightFunction::ou(0.7);
    auto opt = optimal_weight_curve(ou, c);
    for (int it = 0; it < 100; ++it) {
        WeightCurve q = random_admissible(rng, c);
        CHECK(excursion_premium_reported(q, ou) <= opt.value + 1e-9);
    }
}

TEST_CASE("optimize report carries the contracted keys") {
    ConstraintSet c;
    c.q_floor = 0.3;
    auto w = WeightFunction::bang_bang(0.8);
    auto opt = optimal_weight_curve(w, c);
    auto report = entroport::premium_report_json(w.kind(), 0.8, c, opt);
    CHECK(report["w_kind"] == "bang_bang");
    CHECK(report["gamma"] == 0.8);
    CHECK(report["constraints"]["q_floor"] == 0.3);
    CHECK(report.contains("lambda_eq_weight"));
    CHECK(report.contains("lambda_optimal"));
    REQUIRE(report["q_samples"].is_array());
    CHECK(report["q_samples"].size() == 61);
    // floor active on the positive side
    bool found = false;
    for (const auto& pair : report["q_samples"]) {
        if (std::abs(pair[0].get<double>() - 1.0) < 1e-9) {
            CHECK(pair[1].get<double>() == doctest::Approx(0.3).epsilon(1e-12));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("growth rate weight") {
    CHECK(growth_rate_weight(0.0, 0.3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(growth_rate_weight(0.02, 0.2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(growth_rate_weight(-0.01, 0.2) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(growth_rate_weight(0.1, 0.0), DataError);
}
