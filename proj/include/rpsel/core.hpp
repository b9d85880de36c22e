#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rpsel {

// Breakdown of an iteration or scheme (CLI maps this to exit code 2).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed market and preference constants, annualized.
struct MarketParams {
    double r;      // risk-free rate (per year)
    double sigma;  // volatility (per sqrt(year))
    double T;      // horizon (years)
    double k;      // CARA absolute risk aversion
    double a;      // confidence multiplier (1.96 ~ 95% set)

    double sigma_sq() const { return sigma * sigma; }

    void validate() const {
        if (!std::isfinite(r)) throw std::invalid_argument("market.r must be finite");
        if (!(std::isfinite(sigma) && sigma > 0.0))
            throw std::invalid_argument("market.sigma must be > 0");
        if (!(std::isfinite(T) && T > 0.0))
            throw std::invalid_argument("market.T must be > 0");
        if (!(std::isfinite(k) && k > 0.0))
            throw std::invalid_argument("market.k must be > 0");
        if (!(std::isfinite(a) && a >= 0.0))
            throw std::invalid_argument("market.a must be >= 0");
    }
};

// Gaussian prior on the unknown drift. sigma0_sq == 0 is the known-drift case.
struct Prior {
    double y0;
    double sigma0_sq;

    void validate() const {
        if (!std::isfinite(y0)) throw std::invalid_argument("prior.y0 must be finite");
        if (!(std::isfinite(sigma0_sq) && sigma0_sq >= 0.0))
            throw std::invalid_argument("prior.sigma0_sq must be >= 0");
    }
};

// Filter state: posterior mean y and variance gamma of the drift at time t.
struct BeliefState {
    double t;
    double y;
    double gamma;
};

struct ConfidenceInterval {
    double mu_min;
    double mu_max;

    double width() const { return mu_max - mu_min; }
    double midpoint() const { return 0.5 * (mu_min + mu_max); }
    bool contains(double x) const { return mu_min <= x && x <= mu_max; }
};

}  // namespace rpsel
