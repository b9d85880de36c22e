#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rpsel {

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::sqrt2 * std::numbers::inv_sqrtpi);
}

// erfc keeps full relative accuracy in the lower tail.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// E[(X-b)^2 1{X>=b}] for X ~ N(m,v); v = 0 degenerates to the point mass.
inline double gaussian_upper_quadratic_moment(double m, double v, double b) {
    if (v < 0.0)
        throw std::domain_error("gaussian_upper_quadratic_moment: v < 0");
    const double e = m - b;
    if (v == 0.0) return m >= b ? e * e : 0.0;
    const double s = std::sqrt(v);
    const double d = e / s;
    return (v + e * e) * norm_cdf(d) + e * s * norm_pdf(d);
}

// E[(X-b) 1{X>=b}] for X ~ N(m,v).
inline double gaussian_upper_linear_moment(double m, double v, double b) {
    if (v < 0.0)
        throw std::domain_error("gaussian_upper_linear_moment: v < 0");
    const double e = m - b;
    if (v == 0.0) return m >= b ? e : 0.0;
    const double s = std::sqrt(v);
    const double d = e / s;
    return e * norm_cdf(d) + s * norm_pdf(d);
}

}  // namespace rpsel
