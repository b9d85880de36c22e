#pragma once

#include <utility>

#include "rpsel/core.hpp"

namespace rpsel {

// Posterior variance gamma(t) = (sigma0^-2 + t sigma^-2)^-1; deterministic,
// decreasing, gamma(0) = sigma0^2. Zero prior variance stays zero.
inline double gamma_at(const MarketParams& mp, const Prior& pr, double t) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("gamma_at: t outside [0,T]");
    if (pr.sigma0_sq == 0.0) return 0.0;
    return 1.0 / (1.0 / pr.sigma0_sq + t / mp.sigma_sq());
}

// Bayesian filter in closed form: the posterior mean of the drift given the
// log-price displacement z_t - z_0 over [0,t].
inline BeliefState posterior_from_logprice(const MarketParams& mp, const Prior& pr,
                                           double t, double z_t, double z_0) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("posterior_from_logprice: t outside [0,T]");
    if (pr.sigma0_sq == 0.0) return {t, pr.y0, 0.0};
    const double g = gamma_at(mp, pr, t);
    const double s2 = mp.sigma_sq();
    const double y = g * ((z_t - z_0 + 0.5 * t * s2) / s2 + pr.y0 / pr.sigma0_sq);
    return {t, y, g};
}

// Drift confidence set centered at the posterior mean, half-width a*sqrt(gamma).
inline ConfidenceInterval confidence_set(const MarketParams& mp, const BeliefState& b) {
    if (b.gamma < 0.0)
        throw std::domain_error("confidence_set: negative posterior variance");
    const double half = mp.a * std::sqrt(b.gamma);
    return {b.y - half, b.y + half};
}

// Unconditional law of Y(t): N(y0, sigma0^4 t / (sigma0^2 t + sigma^2)).
inline std::pair<double, double> y_marginal_law(const MarketParams& mp, const Prior& pr,
                                                double t) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("y_marginal_law: t outside [0,T]");
    const double v =
        pr.sigma0_sq * pr.sigma0_sq * t / (pr.sigma0_sq * t + mp.sigma_sq());
    return {pr.y0, v};
}

}  // namespace rpsel
