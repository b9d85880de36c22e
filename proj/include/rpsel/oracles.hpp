#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rpsel/market.hpp"
#include "rpsel/normal.hpp"
#include "rpsel/quadrature.hpp"
#include "rpsel/rng.hpp"

namespace rpsel {

namespace detail {

// Law of Y^{t,y}(s) along the drift-learning bridge: exactly Gaussian with
//   mean p(s;t,y) = gamma(s) y / gamma(t) + gamma(s) r (s-t) / sigma^2
//   var          = gamma(s)^2 (s-t) / sigma^2.
// The degenerate prior collapses it to the point mass at y.
struct BridgeLaw {
    double mean;
    double var;
    double band_half;  // a * sqrt(gamma(s))
};

inline BridgeLaw bridge_law(const MarketParams& mp, const Prior& pr, double s, double t,
                            double y) {
    const double gs = gamma_at(mp, pr, s);
    const double gt = gamma_at(mp, pr, t);
    const double ratio = gt == 0.0 ? 1.0 : gs / gt;
    const double s2 = mp.sigma_sq();
    return {ratio * y + gs * mp.r * (s - t) / s2, gs * gs * (s - t) / s2,
            mp.a * std::sqrt(gs)};
}

}  // namespace detail

// E[g~(s, Y^{t,y}(s))]: the piecewise-quadratic PDE source averaged over the
// exact bridge law. The two indicator branches are Gaussian partial moments;
// the lower branch is the upper one reflected through the origin.
inline double expected_source(const MarketParams& mp, const Prior& pr, double s, double t,
                              double y) {
    if (s < t) throw std::domain_error("expected_source: s < t");
    const auto law = detail::bridge_law(mp, pr, s, t, y);
    const double up = gaussian_upper_quadratic_moment(law.mean, law.var, mp.r + law.band_half);
    const double lo =
        gaussian_upper_quadratic_moment(-law.mean, law.var, -(mp.r - law.band_half));
    return (up + lo) / (2.0 * mp.sigma_sq());
}

// E[g~_y(s, Y^{t,y}(s))] from the linear partial moments (same branch split).
inline double expected_source_slope(const MarketParams& mp, const Prior& pr, double s,
                                    double t, double y) {
    if (s < t) throw std::domain_error("expected_source_slope: s < t");
    const auto law = detail::bridge_law(mp, pr, s, t, y);
    const double up = gaussian_upper_linear_moment(law.mean, law.var, mp.r + law.band_half);
    const double lo =
        gaussian_upper_linear_moment(-law.mean, law.var, -(mp.r - law.band_half));
    return (up - lo) / mp.sigma_sq();
}

// Stochastic representation f(t,y) = -E[ int_t^T g~(s, Y^{t,y}(s)) ds ], with
// the inner expectation closed-form and a 1-D time quadrature outside.
inline double f_quadrature(const MarketParams& mp, const Prior& pr, double t, double y,
                           const QuadratureConfig& cfg = {}) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("f_quadrature: t outside [0,T]");
    if (t == mp.T) return 0.0;
    const double val = integrate(
        [&](double s) { return expected_source(mp, pr, s, t, y); }, t, mp.T, cfg);
    return -val;
}

// f_y(t,y) = -int_t^T E[g~_y(s, Y^{t,y}(s))] gamma(s)/gamma(t) ds.
inline double fy_quadrature(const MarketParams& mp, const Prior& pr, double t, double y,
                            const QuadratureConfig& cfg = {}) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("fy_quadrature: t outside [0,T]");
    const double gt = gamma_at(mp, pr, t);
    if (gt == 0.0)
        throw std::domain_error("fy_quadrature: gamma(t) == 0 (degenerate prior)");
    if (t == mp.T) return 0.0;
    const double val = integrate(
        [&](double s) {
            return expected_source_slope(mp, pr, s, t, y) * gamma_at(mp, pr, s) / gt;
        },
        t, mp.T, cfg);
    return -val;
}

struct McEstimate {
    double estimate;
    double std_error;
};

// Plain Monte Carlo on the same representation. Y is sampled exactly from the
// bridge form (no Euler bias); only the per-path trapezoid in time is
// approximate. Deterministic per (seed, n_paths, n_steps).
inline McEstimate f_mc(const MarketParams& mp, const Prior& pr, double t, double y,
                       int n_paths, std::uint64_t seed, int n_steps = 500) {
    if (n_paths < 100)
        throw std::invalid_argument("f_mc: n_paths < 100 gives a meaningless std error");
    if (!(t >= 0.0 && t <= mp.T)) throw std::domain_error("f_mc: t outside [0,T]");
    if (t == mp.T) return {0.0, 0.0};

    const double s2 = mp.sigma_sq();
    const double ds = (mp.T - t) / n_steps;
    const double sqrt_ds = std::sqrt(ds);
    const double gt = gamma_at(mp, pr, t);
    const bool degenerate = gt == 0.0;
    const double h0 = degenerate ? 0.0 : y / gt;

    // per-node schedule
    std::vector<double> gs(n_steps + 1), band(n_steps + 1), drift(n_steps + 1);
    for (int j = 0; j <= n_steps; ++j) {
        const double s = t + j * ds;
        gs[j] = gamma_at(mp, pr, std::min(s, mp.T));
        band[j] = mp.a * std::sqrt(gs[j]);
        drift[j] = mp.r * (s - t) / s2;
    }
    const auto g_tilde = [&](int j, double yv) {
        const double up = mp.r - yv + band[j];
        const double lo = mp.r - yv - band[j];
        double g = 0.0;
        if (up <= 0.0) g += up * up;
        if (lo >= 0.0) g += lo * lo;
        return g / (2.0 * s2);
    };

    // Welford across paths
    double mean = 0.0, m2 = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        NormalRng rng(path_seed(seed, static_cast<std::uint64_t>(p)));
        double w = 0.0;
        double acc = 0.0;
        double g_prev = g_tilde(0, degenerate ? y : gs[0] * h0);
        for (int j = 1; j <= n_steps; ++j) {
            w += sqrt_ds * rng.gauss();
            const double yj = degenerate ? y : gs[j] * (h0 + drift[j] + w / mp.sigma);
            const double gj = g_tilde(j, yj);
            acc += 0.5 * (g_prev + gj) * ds;
            g_prev = gj;
        }
        const double v = -acc;
        const double delta = v - mean;
        mean += delta / (p + 1);
        m2 += delta * (v - mean);
    }
    const double var = m2 / (n_paths - 1);
    return {mean, std::sqrt(var / n_paths)};
}

// Closed-form coefficients of the a = 0 solution f = f1 y^2 + f2 y + f3.
struct A0Coefficients {
    double f1;
    double f2;
    double f3;

    double value(double y) const { return (f1 * y + f2) * y + f3; }
    double slope(double y) const { return 2.0 * f1 * y + f2; }
};

inline A0Coefficients closed_form_a0(const MarketParams& mp, const Prior& pr, double t) {
    if (pr.sigma0_sq == 0.0)
        throw std::domain_error("closed_form_a0: degenerate prior (use the Merton branch)");
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("closed_form_a0: t outside [0,T]");
    const double gt = gamma_at(mp, pr, t);
    const double gT = gamma_at(mp, pr, mp.T);
    const double s2 = mp.sigma_sq();
    const double tau = mp.T - t;
    const double f1 = (gT - gt) / (2.0 * gt * gt);
    const double f2 = -2.0 * mp.r * f1;
    const double f3 = mp.r * mp.r / (s2 * s2) * gT * tau * tau / 2.0 -
                      (mp.r * mp.r - gT) * tau / (2.0 * s2) - 0.5 * std::log(gt / gT);
    return {f1, f2, f3};
}

// Classical full-information strategy (known drift y0).
inline double merton_strategy(const MarketParams& mp, const Prior& pr, double t) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("merton_strategy: t outside [0,T]");
    return (pr.y0 - mp.r) / (mp.k * std::exp(mp.r * (mp.T - t)) * mp.sigma_sq());
}

// Non-robust strategy under partial information: gamma(T)/gamma(t) times the
// myopic Merton demand at the posterior mean.
inline double partial_info_strategy(const MarketParams& mp, const Prior& pr, double t,
                                    double y) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("partial_info_strategy: t outside [0,T]");
    const double ratio =
        pr.sigma0_sq == 0.0 ? 1.0 : gamma_at(mp, pr, mp.T) / gamma_at(mp, pr, t);
    return ratio * (y - mp.r) / (mp.k * std::exp(mp.r * (mp.T - t)) * mp.sigma_sq());
}

}  // namespace rpsel
