#include <catch2/catch_amalgamated.hpp>

#include "rpsel/simulate.hpp"
#include "rpsel/strategy.hpp"

using namespace rpsel;

namespace {
const MarketParams kRef{0.018, 0.213, 0.5, 1.0, 1.96};
const Prior kPrior{0.174, 0.00908};
}  // namespace

TEST_CASE("worst_case_mu") {
    SECTION("r inside the set at the reference calibration") {
        const auto [regime, mu] = worst_case_mu(kRef, kPrior, 0.0, 0.174);
        CHECK(regime == Regime::InSet);
        CHECK(mu == 0.174);
    }
    SECTION("r below the set") {
        const auto [regime, mu] = worst_case_mu(kRef, kPrior, 0.0, 0.5);
        CHECK(regime == Regime::BelowSet);
        CHECK_THAT(mu, Catch::Matchers::WithinAbs(0.313234, 1e-6));
    }
    SECTION("r above the set") {
        const auto [regime, mu] = worst_case_mu(kRef, kPrior, 0.0, -0.5);
        CHECK(regime == Regime::AboveSet);
        CHECK_THAT(mu, Catch::Matchers::WithinAbs(-0.5 + 0.186766, 1e-5));
    }
    SECTION("zero-width set") {
        MarketParams mp = kRef;
        mp.a = 0.0;
        CHECK(worst_case_mu(mp, kPrior, 0.0, 0.3) ==
              std::pair{Regime::BelowSet, 0.3});
        CHECK(worst_case_mu(mp, kPrior, 0.0, -0.3) ==
              std::pair{Regime::AboveSet, -0.3});
    }
    SECTION("boundary tie folds into InSet") {
        // constants chosen so y - a sqrt(gamma) == r holds exactly in doubles
        MarketParams mp{0.25, 1.0, 1.0, 1.0, 2.0};
        Prior pr{0.0, 0.25};
        REQUIRE(mp.a * std::sqrt(gamma_at(mp, pr, 0.0)) == 1.0);
        const auto [regime, mu] = worst_case_mu(mp, pr, 0.0, 1.25);
        CHECK(regime == Regime::InSet);
        CHECK(mu == 1.25);
    }
}

TEST_CASE("robust_feedback") {
    SECTION("decomposition is exact and InSet is hedging-only") {
        const double fy = fy_quadrature(kRef, kPrior, 0.1, 0.2);
        const auto dec = robust_feedback(kRef, kPrior, 0.1, 0.2, fy);
        CHECK(dec.pi == dec.myopic + dec.hedging);
        CHECK(dec.regime == Regime::InSet);
        CHECK(dec.myopic == 0.0);
        CHECK(dec.pi == dec.hedging);
        CHECK(dec.mu_any_in_set);
    }
    SECTION("a = 0 reduces to the partial-information strategy") {
        MarketParams mp = kRef;
        mp.a = 0.0;
        for (double t : {0.0, 0.2, 0.45}) {
            const auto c = closed_form_a0(mp, kPrior, t);
            for (double y : {-0.4, 0.0, 0.174, 0.61}) {
                const auto dec = robust_feedback(mp, kPrior, t, y, c.slope(y));
                CHECK_THAT(dec.pi, Catch::Matchers::WithinAbs(
                                       partial_info_strategy(mp, kPrior, t, y), 1e-10));
            }
        }
    }
    SECTION("degenerate prior reduces to Merton") {
        Prior pr{0.21, 0.0};
        const auto dec = robust_feedback(kRef, pr, 0.2, pr.y0, 0.0);
        CHECK_THAT(dec.pi, Catch::Matchers::WithinAbs(merton_strategy(kRef, pr, 0.2), 1e-12));
        CHECK(dec.hedging == 0.0);
        CHECK(dec.pi == dec.myopic);
    }
    SECTION("small a stays within 1e-4 of the partial-information strategy") {
        MarketParams mp = kRef;
        mp.a = 1e-6;
        for (double y : {-0.3, 0.3, 0.6}) {
            const double fy = fy_quadrature(mp, kPrior, 0.0, y);
            const auto dec = robust_feedback(mp, kPrior, 0.0, y, fy);
            CHECK_THAT(dec.pi, Catch::Matchers::WithinAbs(
                                   partial_info_strategy(mp, kPrior, 0.0, y), 1e-4));
        }
    }
    SECTION("continuous across the regime boundaries") {
        // the myopic term vanishes exactly at the set endpoints, so a pair
        // straddling the boundary differs only by the O(d) slope
        for (double t : {0.0, 0.25}) {
            const double c = kRef.a * std::sqrt(gamma_at(kRef, kPrior, t));
            for (double edge : {kRef.r + c, kRef.r - c}) {
                const double d = 1e-13;
                const auto lo = robust_feedback(kRef, kPrior, t, edge - d,
                                                fy_quadrature(kRef, kPrior, t, edge - d));
                const auto hi = robust_feedback(kRef, kPrior, t, edge + d,
                                                fy_quadrature(kRef, kPrior, t, edge + d));
                CHECK(lo.regime != hi.regime);
                CHECK(std::abs(hi.pi - lo.pi) <= 1e-10);
            }
        }
    }
    SECTION("hedging demand sign") {
        for (double t : {0.0, 0.3}) {
            const auto left = robust_feedback(kRef, kPrior, t, kRef.r - 0.2,
                                              fy_quadrature(kRef, kPrior, t, kRef.r - 0.2));
            const auto right = robust_feedback(kRef, kPrior, t, kRef.r + 0.2,
                                               fy_quadrature(kRef, kPrior, t, kRef.r + 0.2));
            const auto at_r = robust_feedback(kRef, kPrior, t, kRef.r,
                                              fy_quadrature(kRef, kPrior, t, kRef.r));
            CHECK(left.hedging > 0.0);
            CHECK(right.hedging < 0.0);
            CHECK(std::abs(at_r.hedging) < 1e-12);
        }
    }
    SECTION("ambiguity adjustment bounds against the partial-information strategy") {
        for (double t : {0.0, 0.125, 0.25, 0.375, 0.5}) {
            const double g = gamma_at(kRef, kPrior, t);
            const double bound =
                kRef.a * std::sqrt(g) * std::exp(-kRef.r * (kRef.T - t)) /
                (kRef.k * kRef.sigma_sq());
            for (double y : {-0.3, 0.0, 0.174, 0.35, 0.6}) {
                const double fy = t == kRef.T ? 0.0 : fy_quadrature(kRef, kPrior, t, y);
                const double pi = robust_feedback(kRef, kPrior, t, y, fy).pi;
                const double pi0 = partial_info_strategy(kRef, kPrior, t, y);
                if (y > kRef.r) CHECK(pi > pi0 - bound - 1e-12);
                if (y < kRef.r) CHECK(pi < pi0 + bound + 1e-12);
            }
        }
    }
}

TEST_CASE("sweep anchors at y = 0.5") {
    // regression anchors for pi*(0) across the ambiguity multiplier, frozen
    // from the first verified computation; the a = 0 row is the
    // partial-information strategy by construction
    const std::vector<std::pair<double, double>> anchors{{0.0, 9.5710485597},
                                                         {0.5, 8.6272307469},
                                                         {1.0, 7.6834129340},
                                                         {1.96, 5.8712827332},
                                                         {3.0, 3.9081416824}};
    const double y = 0.5;
    for (const auto& [a, expected] : anchors) {
        MarketParams mp = kRef;
        mp.a = a;
        const double fy = a == 0.0 ? closed_form_a0(mp, kPrior, 0.0).slope(y)
                                   : fy_quadrature(mp, kPrior, 0.0, y);
        CHECK_THAT(robust_feedback(mp, kPrior, 0.0, y, fy).pi,
                   Catch::Matchers::WithinAbs(expected, 1e-8));
    }
    CHECK_THAT(partial_info_strategy(kRef, kPrior, 0.0, y),
               Catch::Matchers::WithinAbs(9.5710485597, 1e-8));
}

TEST_CASE("worst_case_drift_selector") {
    const double t = 0.1, y = 0.3;
    const double fy = fy_quadrature(kRef, kPrior, t, y);
    const double c = kRef.a * std::sqrt(gamma_at(kRef, kPrior, t));
    const double pivot = std::exp(-kRef.r * (kRef.T - t)) /
                         (kRef.k * kRef.sigma_sq()) * fy *
                         gamma_at(kRef, kPrior, t);
    CHECK(worst_case_drift_selector(kRef, kPrior, t, y, fy, pivot + 1.0) == y - c);
    CHECK(worst_case_drift_selector(kRef, kPrior, t, y, fy, pivot - 1.0) == y + c);
    CHECK(worst_case_drift_selector(kRef, kPrior, t, y, fy, pivot) == y);
    // the InSet robust feedback lands exactly on the tie branch
    const double y_in = 0.1;
    const double fy_in = fy_quadrature(kRef, kPrior, t, y_in);
    const auto dec = robust_feedback(kRef, kPrior, t, y_in, fy_in);
    REQUIRE(dec.regime == Regime::InSet);
    CHECK(worst_case_drift_selector(kRef, kPrior, t, y_in, fy_in, dec.pi) == y_in);
}

TEST_CASE("value_function") {
    SECTION("terminal condition is the utility itself") {
        for (double x : {-1.0, 0.0, 2.0})
            CHECK_THAT(value_function(kRef, kPrior, 0.5, x, 0.0),
                       Catch::Matchers::WithinRel(-std::exp(-kRef.k * x) / kRef.k, 1e-15));
    }
    SECTION("negative f improves the value and never flips the sign") {
        const double base = value_function(kRef, kPrior, 0.0, 1.0, 0.0);
        const double v = value_function(kRef, kPrior, 0.0, 1.0, -0.2);
        CHECK(v < 0.0);
        CHECK(v > base);
    }
    SECTION("increasing in wealth") {
        CHECK(value_function(kRef, kPrior, 0.1, 2.0, -0.1) >
              value_function(kRef, kPrior, 0.1, 1.0, -0.1));
    }
    SECTION("pipeline value at the reference calibration") {
        const double f = f_quadrature(kRef, kPrior, 0.0, 0.174);
        CHECK_THAT(value_function(kRef, kPrior, 0.0, 1.0, f),
                   Catch::Matchers::WithinAbs(-0.36455105, 1e-6));
    }
    SECTION("exponent overflow is a named numerical failure") {
        CHECK_THROWS_AS(value_function(kRef, kPrior, 0.0, -800.0, 0.0), numerical_error);
    }
}

TEST_CASE("classify_regions") {
    GridSpec g;
    g.y_min = -1.0;
    g.y_max = 1.0;
    g.n_y = 201;
    g.n_t = 51;
    const auto surf = quadrature_surface(kRef, kPrior, g);

    SECTION("three ordered regions at the reference calibration") {
        const auto regions = classify_regions(kRef, kPrior, 0.0, surf);
        REQUIRE(regions.size() == 3);
        CHECK(regions[0].label == RegionLabel::Kind::Sell);
        CHECK(regions[1].label == RegionLabel::Kind::SmallTrade);
        CHECK(regions[2].label == RegionLabel::Kind::Buy);
        const double c = kRef.a * std::sqrt(gamma_at(kRef, kPrior, 0.0));
        CHECK(regions[0].upper == regions[1].lower);
        CHECK(regions[1].upper == regions[2].lower);
        CHECK(regions[1].lower < kRef.r - c);
        CHECK(regions[1].upper > kRef.r + c);
        CHECK_THAT(regions[1].inner_crossing, Catch::Matchers::WithinAbs(kRef.r, 5e-3));
    }
    SECTION("a = 0 gives two regions split at r") {
        MarketParams mp = kRef;
        mp.a = 0.0;
        const auto surf0 = quadrature_surface(mp, kPrior, g);
        const auto regions = classify_regions(mp, kPrior, 0.0, surf0);
        REQUIRE(regions.size() == 2);
        CHECK(regions[0].label == RegionLabel::Kind::Sell);
        CHECK(regions[1].label == RegionLabel::Kind::Buy);
        CHECK(regions[0].upper == mp.r);
    }
    SECTION("grid not extending beyond the band is rejected with advice") {
        GridSpec narrow = g;
        narrow.y_min = -0.05;
        narrow.y_max = 0.1;
        const auto snarrow = quadrature_surface(kRef, kPrior, narrow);
        CHECK_THROWS_WITH(classify_regions(kRef, kPrior, 0.0, snarrow),
                          Catch::Matchers::ContainsSubstring("widen the grid"));
    }
    SECTION("t = T rejected") {
        CHECK_THROWS_AS(classify_regions(kRef, kPrior, 0.5, surf), std::domain_error);
    }
}

TEST_CASE("admissibility evaluation") {
    SECTION("the reference calibration with the fixed constants") {
        const auto w = evaluate_admissibility(kRef, kPrior, 1.1, 2.0, 1.0);
        CHECK(w.delta8 == 2.0);
        CHECK_THAT(w.lhs1, Catch::Matchers::WithinAbs(0.2996, 1e-3));
        CHECK_THAT(w.lhs2, Catch::Matchers::WithinAbs(0.0082, 1e-3));
        CHECK(w.lhs2_alt > 0.0);
        CHECK(w.valid());
    }
    SECTION("degenerate prior is trivially admissible") {
        const auto w = evaluate_admissibility(kRef, Prior{0.1, 0.0}, 1.1, 2.0, 1.0);
        CHECK(w.lhs1 == 0.0);
        CHECK_THAT(w.lhs2, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK(w.valid());
    }
    SECTION("conjugacy constraint") {
        const auto w = evaluate_admissibility(kRef, kPrior, 1.3, 3.7, 0.5);
        CHECK_THAT(1.0 / w.delta7 + 1.0 / w.delta8, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("validity is definitionally both sides below one") {
        NormalRng rng(5);
        for (int i = 0; i < 50; ++i) {
            const double d1 = 1.0 + rng.uniform() * 3.0;
            const double d7 = 1.0 + rng.uniform() * 9.0;
            const double e3 = std::exp(4.0 * (rng.uniform() - 0.5));
            MarketParams mp = kRef;
            mp.T = 0.1 + 5.0 * rng.uniform();
            const auto w = evaluate_admissibility(mp, kPrior, d1, d7, e3);
            CHECK(w.valid() == (w.lhs1 < 1.0 && w.lhs2 < 1.0));
        }
    }
    SECTION("bad constants rejected") {
        CHECK_THROWS_AS(evaluate_admissibility(kRef, kPrior, 1.0, 2.0, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(evaluate_admissibility(kRef, kPrior, 1.1, 2.0, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("admissibility search") {
    SECTION("finds a witness at the reference calibration") {
        const auto rep = check_admissibility(kRef, kPrior, 10000);
        CHECK(rep.found);
        CHECK(rep.best.valid());
        CHECK(std::max(rep.best.lhs1, rep.best.lhs2) < 0.5);
    }
    SECTION("fails for a 100x horizon") {
        MarketParams mp = kRef;
        mp.T = 50.0;
        const auto rep = check_admissibility(mp, kPrior, 10000);
        CHECK_FALSE(rep.found);
        CHECK(rep.best.lhs1 >= 1.0);
    }
}
