#pragma once

#include <cmath>
#include <string>

#include "rpsel/core.hpp"

namespace rpsel {

enum class QuadratureRule { CompositeSimpson, Adaptive };

struct QuadratureConfig {
    int n_time_nodes = 201;
    QuadratureRule rule = QuadratureRule::CompositeSimpson;
    double abs_tol = 1e-10;

    void validate() const {
        if (rule == QuadratureRule::CompositeSimpson &&
            (n_time_nodes < 3 || n_time_nodes % 2 == 0))
            throw std::invalid_argument(
                "quadrature.n_time_nodes must be odd and >= 3 for composite Simpson");
        if (!(std::isfinite(abs_tol) && abs_tol > 0.0))
            throw std::invalid_argument("quadrature.abs_tol must be > 0");
    }
};

template <class F>
double composite_simpson(F&& f, double a, double b, int n_nodes) {
    const double h = (b - a) / (n_nodes - 1);
    double odd = 0.0, even = 0.0;
    for (int i = 1; i + 1 < n_nodes; i += 2) odd += f(a + i * h);
    for (int i = 2; i + 1 < n_nodes; i += 2) even += f(a + i * h);
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth, bool& converged) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // once any subinterval has exhausted the depth budget the run is doomed;
    // stop refining and surface the best estimate so far
    if (std::abs(delta) <= 15.0 * tol || !converged) return left + right + delta / 15.0;
    if (depth <= 0) {
        converged = false;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace detail

// Throws numerical_error if the tolerance is not met within the recursion
// budget; the message carries the last estimate.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    bool converged = true;
    const double est =
        detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth, converged);
    if (!converged)
        throw numerical_error("adaptive_simpson: tolerance " + std::to_string(abs_tol) +
                              " not reached; last estimate " + std::to_string(est));
    return est;
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureConfig& cfg) {
    cfg.validate();
    if (b <= a) return 0.0;
    if (cfg.rule == QuadratureRule::CompositeSimpson)
        return composite_simpson(f, a, b, cfg.n_time_nodes);
    return adaptive_simpson(f, a, b, cfg.abs_tol);
}

}  // namespace rpsel
