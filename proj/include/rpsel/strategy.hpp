#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rpsel/pde.hpp"

namespace rpsel {

// Position of the risk-free rate relative to the confidence set Lambda_{t,y}.
enum class Regime { BelowSet, InSet, AboveSet };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::BelowSet: return "BelowSet";
        case Regime::InSet: return "InSet";
        default: return "AboveSet";
    }
}

struct StrategyDecision {
    double pi;
    Regime regime;
    double mu_worst;     // representative value y when the whole set is worst
    bool mu_any_in_set;  // InSet convention flag
    double myopic;
    double hedging;
};

// Worst-case drift: the set endpoint nearest r, or the whole set when r is
// inside it. Ties at an endpoint fold into InSet (the branches agree there).
inline std::pair<Regime, double> worst_case_mu(const MarketParams& mp, const Prior& pr,
                                               double t, double y) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("worst_case_mu: t outside [0,T]");
    const double c = mp.a * std::sqrt(gamma_at(mp, pr, t));
    if (mp.r < y - c) return {Regime::BelowSet, y - c};
    if (mp.r > y + c) return {Regime::AboveSet, y + c};
    return {Regime::InSet, y};
}

// Robust optimal feedback: worst-case myopic demand plus the learning hedge
// e^{-r(T-t)} f_y gamma / (k sigma^2). The degenerate prior reduces to the
// classical strategy with known drift y0.
inline StrategyDecision robust_feedback(const MarketParams& mp, const Prior& pr, double t,
                                        double y, double f_y_value) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("robust_feedback: t outside [0,T]");
    if (pr.sigma0_sq == 0.0) {
        const double pi = merton_strategy(mp, pr, t);
        const Regime reg = mp.r < y   ? Regime::BelowSet
                           : mp.r > y ? Regime::AboveSet
                                      : Regime::InSet;
        return {pi, reg, y, reg == Regime::InSet, pi, 0.0};
    }
    const double g = gamma_at(mp, pr, t);
    const double disc = std::exp(-mp.r * (mp.T - t)) / (mp.k * mp.sigma_sq());
    const double hedging = disc * f_y_value * g;
    const auto [regime, mu] = worst_case_mu(mp, pr, t, y);
    double myopic = 0.0;
    if (regime != Regime::InSet) myopic = disc * (mu - mp.r);
    return {myopic + hedging, regime, mu, regime == Regime::InSet, myopic, hedging};
}

// Drift the adversary plays against a given position pi: the set endpoint on
// the punishing side of the hedge-only position, or y at the tie (the
// convention fixed for the tie, where every choice yields the same value).
inline double worst_case_drift_selector(const MarketParams& mp, const Prior& pr, double t,
                                        double y, double f_y_value, double pi) {
    const double g = gamma_at(mp, pr, t);
    const double c = mp.a * std::sqrt(g);
    // identical arithmetic to the hedging term so the robust feedback lands on
    // the tie branch exactly
    const double disc = std::exp(-mp.r * (mp.T - t)) / (mp.k * mp.sigma_sq());
    const double pivot = disc * f_y_value * g;
    if (pi > pivot) return y - c;
    if (pi < pivot) return y + c;
    return y;
}

// Candidate value function phi(t,x,y) = -(1/k) exp(-k e^{r(T-t)} x + f).
inline double value_function(const MarketParams& mp, const Prior& pr, double t, double x,
                             double f_value) {
    (void)pr;
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("value_function: t outside [0,T]");
    const double expo = -mp.k * std::exp(mp.r * (mp.T - t)) * x + f_value;
    if (expo > 700.0)
        throw numerical_error("value_function: exponent overflow (" + std::to_string(expo) +
                              ")");
    return -std::exp(expo) / mp.k;
}

struct RegionLabel {
    enum class Kind { Sell, SmallTrade, Buy };
    Kind label;
    double lower;   // y delimiting the region from below (grid edge if unbounded)
    double upper;   // y delimiting it from above
    double inner_crossing = std::numeric_limits<double>::quiet_NaN();  // SmallTrade only
};

inline const char* to_string(RegionLabel::Kind k) {
    switch (k) {
        case RegionLabel::Kind::Sell: return "Sell";
        case RegionLabel::Kind::SmallTrade: return "SmallTrade";
        default: return "Buy";
    }
}

namespace detail {

inline double bisect_sign_change(const std::function<double(double)>& f, double lo,
                                 double hi, double flo, double tol = 1e-10) {
    double fl = flo;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fl < 0.0) == (fm < 0.0)) {
            lo = mid;
            fl = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Sell / small-trade / buy split of the state axis at fixed t from the zero
// crossings of y -> pi(t,y) evaluated on the interpolated surface. The outer
// crossings sit strictly outside the myopic dead band; the inner one is the
// hedging sign change at y = r.
inline std::vector<RegionLabel> classify_regions(const MarketParams& mp, const Prior& pr,
                                                 double t, const SolutionSurface& surf) {
    if (!(t >= 0.0 && t < mp.T))
        throw std::domain_error("classify_regions: requires t < T");
    const double y_lo_grid = surf.states.front();
    const double y_hi_grid = surf.states.back();
    const auto pi_at = [&](double y) {
        return robust_feedback(mp, pr, t, y, surface_lookup(surf, t, y).second).pi;
    };
    const double c = mp.a * std::sqrt(gamma_at(mp, pr, t));

    if (c == 0.0) {
        // zero-width set: partial-information sign structure, two regions
        if (!(y_lo_grid < mp.r && mp.r < y_hi_grid))
            throw std::invalid_argument(
                "classify_regions: grid does not straddle r; widen the grid");
        return {{RegionLabel::Kind::Sell, y_lo_grid, mp.r, {}},
                {RegionLabel::Kind::Buy, mp.r, y_hi_grid, {}}};
    }

    const double band_lo = mp.r - c;
    const double band_hi = mp.r + c;
    const double eps = 1e-9 * (y_hi_grid - y_lo_grid);
    if (band_lo - eps <= y_lo_grid || band_hi + eps >= y_hi_grid)
        throw std::invalid_argument(
            "classify_regions: grid does not extend beyond the myopic dead band; widen the grid");

    const double p_min = pi_at(y_lo_grid);
    const double p_band_lo = pi_at(band_lo - eps);
    const double p_band_hi = pi_at(band_hi + eps);
    const double p_max = pi_at(y_hi_grid);
    if (!(p_min < 0.0 && p_band_lo > 0.0))
        throw std::invalid_argument(
            "classify_regions: no sign change below the dead band; widen the grid");
    if (!(p_band_hi < 0.0 && p_max > 0.0))
        throw std::invalid_argument(
            "classify_regions: no sign change above the dead band; widen the grid");

    const double y_low =
        detail::bisect_sign_change(pi_at, y_lo_grid, band_lo - eps, p_min);
    const double y_high =
        detail::bisect_sign_change(pi_at, band_hi + eps, y_hi_grid, p_band_hi);
    const double y_mid = detail::bisect_sign_change(pi_at, band_lo + eps, band_hi - eps,
                                                    pi_at(band_lo + eps));

    return {{RegionLabel::Kind::Sell, y_lo_grid, y_low, {}},
            {RegionLabel::Kind::SmallTrade, y_low, y_high, y_mid},
            {RegionLabel::Kind::Buy, y_high, y_hi_grid, {}}};
}

struct AdmissibilityWitness {
    double delta1;
    double delta7;
    double delta8;
    double epsilon3;
    double lhs1;
    double lhs2;
    double lhs2_alt;  // cruder closed-form bound sigma0^6 T^3 / (3 sigma^6)

    bool valid() const { return lhs1 < 1.0 && lhs2 < 1.0; }
};

// Both integrability inequalities evaluated at given constants
// (delta8 = delta7/(delta7-1) from the conjugacy constraint).
inline AdmissibilityWitness evaluate_admissibility(const MarketParams& mp, const Prior& pr,
                                                   double delta1, double delta7,
                                                   double epsilon3) {
    if (!(delta1 > 1.0 && delta7 > 1.0 && epsilon3 > 0.0))
        throw std::invalid_argument(
            "evaluate_admissibility: need delta1 > 1, delta7 > 1, epsilon3 > 0");
    const double delta8 = delta7 / (delta7 - 1.0);
    const double pre = 2.0 * (2.0 * delta1 * delta1 * delta7 - delta1) * delta8;
    const double s2 = mp.sigma_sq();
    const double s0 = pr.sigma0_sq;
    const double T = mp.T;
    const double lhs1 = pre * (1.0 + 1.0 / epsilon3) * T * T * s0 * s0 / (s2 * s2);
    const double inner =
        T * s0 - 2.0 * s2 * std::log((s0 * T + s2) / s2) - s2 * s2 / (s0 * T + s2) + s2;
    const double lhs2 = pre / s2 * (1.0 + epsilon3) * inner;
    const double lhs2_alt = pre * (1.0 + epsilon3) * s0 * s0 * s0 * T * T * T / (3.0 * s2 * s2 * s2);
    return {delta1, delta7, delta8, epsilon3, lhs1, lhs2, lhs2_alt};
}

struct AdmissibilityReport {
    AdmissibilityWitness best;  // minimizer of max(lhs1, lhs2) over the search grid
    bool found;                 // best.valid()
};

// Log-grid search over (delta1, delta7, epsilon3); the objective is smooth and
// unimodal per coordinate, so a grid is enough and reproducible.
inline AdmissibilityReport check_admissibility(const MarketParams& mp, const Prior& pr,
                                               long search_budget = 100000) {
    if (search_budget < 1)
        throw std::invalid_argument("check_admissibility: search_budget must be >= 1");
    const int n = std::max(2, static_cast<int>(std::cbrt(static_cast<double>(search_budget))));
    const auto log_grid = [n](double lo, double hi, int i) {
        return lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    };
    AdmissibilityWitness best{};
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double d1 = log_grid(1.0 + 1e-4, 4.0, i);
        for (int j = 0; j < n; ++j) {
            const double d7 = log_grid(1.0 + 1e-4, 10.0, j);
            for (int l = 0; l < n; ++l) {
                const double e3 = log_grid(1e-2, 1e2, l);
                const auto w = evaluate_admissibility(mp, pr, d1, d7, e3);
                const double score = std::max(w.lhs1, w.lhs2);
                if (score < best_score) {
                    best_score = score;
                    best = w;
                }
            }
        }
    }
    return {best, best.valid()};
}

}  // namespace rpsel
