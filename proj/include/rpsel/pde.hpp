#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "rpsel/oracles.hpp"

namespace rpsel {

struct GridSpec {
    double y_min = -1.0;
    double y_max = 1.0;
    int n_y = 401;
    int n_t = 401;
    double theta = 0.5;  // 0.5 = Crank-Nicolson, 1 = implicit Euler

    void validate() const {
        if (!(std::isfinite(y_min) && std::isfinite(y_max) && y_min < y_max))
            throw std::invalid_argument("grid.y_min must be < grid.y_max");
        if (n_y < 11) throw std::invalid_argument("grid.n_y must be >= 11");
        if (n_t < 2) throw std::invalid_argument("grid.n_t must be >= 2");
        if (!(theta >= 0.0 && theta <= 1.0))
            throw std::invalid_argument("grid.theta must be in [0,1]");
    }
};

// Default state domain: 8 prior standard deviations around r; Y mass beyond
// that is negligible. Widened as needed to cover [lo, hi].
inline GridSpec default_grid(const MarketParams& mp, const Prior& pr, double cover_lo = 0.0,
                             double cover_hi = 0.0) {
    const double s0 = std::sqrt(pr.sigma0_sq);
    GridSpec g;
    g.y_min = std::min(mp.r - 8.0 * s0, cover_lo);
    g.y_max = std::max(mp.r + 8.0 * s0, cover_hi);
    if (g.y_min == g.y_max) {  // degenerate prior
        g.y_min -= 0.5;
        g.y_max += 0.5;
    }
    return g;
}

enum class SurfaceProvenance { FiniteDifference, Quadrature };

struct SolutionSurface {
    GridSpec grid;
    std::vector<double> times;   // ascending, size n_t, times.back() == T
    std::vector<double> states;  // ascending, size n_y
    std::vector<double> f;       // row-major: f[i * n_y + j] at (times[i], states[j])
    std::vector<double> f_y;
    SurfaceProvenance provenance = SurfaceProvenance::FiniteDifference;
    double max_cell_peclet = 0.0;
    bool peclet_warning = false;

    int n_t() const { return static_cast<int>(times.size()); }
    int n_y() const { return static_cast<int>(states.size()); }
    double f_at(int i, int j) const { return f[static_cast<std::size_t>(i) * states.size() + j]; }
    double fy_at(int i, int j) const {
        return f_y[static_cast<std::size_t>(i) * states.size() + j];
    }
};

// Source bracket of the Cauchy problem: zero on the band |y-r| <= a sqrt(gamma(t)),
// quadratic growth outside, C^1 across the band edges.
inline double source_g_tilde(const MarketParams& mp, const Prior& pr, double t, double y) {
    if (!(t >= 0.0 && t <= mp.T))
        throw std::domain_error("source_g_tilde: t outside [0,T]");
    const double c = mp.a * std::sqrt(gamma_at(mp, pr, t));
    const double up = mp.r - y + c;
    const double lo = mp.r - y - c;
    double g = 0.0;
    if (up <= 0.0) g += up * up;
    if (lo >= 0.0) g += lo * lo;
    return g / (2.0 * mp.sigma_sq());
}

namespace detail {

// Thomas algorithm; diag/rhs are overwritten.
inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs,
                              std::vector<double>& out) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    }
}

// Derivative in y of a surface row: fourth-order central stencil inside,
// second-order central next to the edge, one-sided at the edge.
inline void differentiate_row(const double* f, int n, double h, double* out) {
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[1] = (f[2] - f[0]) / (2.0 * h);
    for (int j = 2; j + 2 < n; ++j)
        out[j] = (-f[j + 2] + 8.0 * f[j + 1] - 8.0 * f[j - 1] + f[j - 2]) / (12.0 * h);
    out[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
}

}  // namespace detail

// Backward theta-scheme for
//   f_t + 1/2 gamma^2(t)/sigma^2 f_yy + gamma(t)(r-y)/sigma^2 f_y = g~(t,y),
//   f(T, .) = 0,
// with Dirichlet boundary data from the quadrature representation. Central
// differencing throughout; the advection term is mild for realistic
// parameters, so cell-Peclet trouble is reported as a warning, not upwinded
// away at the cost of an order.
inline SolutionSurface solve_f(const MarketParams& mp, const Prior& pr, const GridSpec& grid,
                               const QuadratureConfig& bc_cfg = {}) {
    mp.validate();
    pr.validate();
    grid.validate();
    const double s0 = std::sqrt(pr.sigma0_sq);
    const double need_lo = mp.r - (6.0 + mp.a) * s0;
    const double need_hi = mp.r + (6.0 + mp.a) * s0;
    if (grid.y_min > need_lo || grid.y_max < need_hi)
        throw std::invalid_argument(
            "solve_f: grid must contain [r - (6+a) sigma0, r + (6+a) sigma0]");

    SolutionSurface surf;
    surf.grid = grid;
    surf.provenance = SurfaceProvenance::FiniteDifference;
    const int ny = grid.n_y, nt = grid.n_t;
    surf.times.resize(nt);
    surf.states.resize(ny);
    const double dt = mp.T / (nt - 1);
    const double h = (grid.y_max - grid.y_min) / (ny - 1);
    for (int i = 0; i < nt; ++i) surf.times[i] = i * dt;
    surf.times.back() = mp.T;
    for (int j = 0; j < ny; ++j) surf.states[j] = grid.y_min + j * h;
    surf.states.back() = grid.y_max;
    surf.f.assign(static_cast<std::size_t>(nt) * ny, 0.0);
    surf.f_y.assign(static_cast<std::size_t>(nt) * ny, 0.0);

    if (pr.sigma0_sq == 0.0) return surf;  // gamma == 0: degenerate zero surface

    const double s2 = mp.sigma_sq();
    const double theta = grid.theta;

    // spatial operator L(t) f = D f_yy + b f_y as tridiagonal bands
    std::vector<double> lo_band(ny), di_band(ny), up_band(ny);
    const auto fill_operator = [&](double t) {
        const double g = gamma_at(mp, pr, t);
        const double diff = 0.5 * g * g / s2;
        double peclet = 0.0;
        for (int j = 0; j < ny; ++j) {
            const double adv = g * (mp.r - surf.states[j]) / s2;
            lo_band[j] = diff / (h * h) - adv / (2.0 * h);
            di_band[j] = -2.0 * diff / (h * h);
            up_band[j] = diff / (h * h) + adv / (2.0 * h);
            peclet = std::max(peclet, std::abs(adv) * h / (2.0 * diff));
        }
        return peclet;
    };

    std::vector<double> l0(ny), d0(ny), u0(ny), l1(ny), d1(ny), u1(ny);
    std::vector<double> g0(ny), g1(ny);
    std::vector<double> A_lo(ny - 2), A_di(ny - 2), A_up(ny - 2), rhs(ny - 2), sol(ny - 2);

    surf.max_cell_peclet = fill_operator(mp.T);
    for (int j = 0; j < ny; ++j) g1[j] = source_g_tilde(mp, pr, mp.T, surf.states[j]);
    l1 = lo_band;
    d1 = di_band;
    u1 = up_band;

    for (int i = nt - 2; i >= 0; --i) {
        const double t0 = surf.times[i];
        surf.max_cell_peclet = std::max(surf.max_cell_peclet, fill_operator(t0));
        l0 = lo_band;
        d0 = di_band;
        u0 = up_band;
        for (int j = 0; j < ny; ++j) g0[j] = source_g_tilde(mp, pr, t0, surf.states[j]);

        const double* f1 = &surf.f[static_cast<std::size_t>(i + 1) * ny];
        double* f0 = &surf.f[static_cast<std::size_t>(i) * ny];

        const double bl = f_quadrature(mp, pr, t0, grid.y_min, bc_cfg);
        const double br = f_quadrature(mp, pr, t0, grid.y_max, bc_cfg);

        // (I - dt theta L0) f0 = (I + dt (1-theta) L1) f1 - dt [theta g0 + (1-theta) g1]
        for (int j = 1; j + 1 < ny; ++j) {
            double v = f1[j] - dt * (theta * g0[j] + (1.0 - theta) * g1[j]);
            v += dt * (1.0 - theta) *
                 (l1[j] * f1[j - 1] + d1[j] * f1[j] + u1[j] * f1[j + 1]);
            rhs[j - 1] = v;
            A_lo[j - 1] = -dt * theta * l0[j];
            A_di[j - 1] = 1.0 - dt * theta * d0[j];
            A_up[j - 1] = -dt * theta * u0[j];
        }
        rhs[0] += dt * theta * l0[1] * bl;
        rhs[ny - 3] += dt * theta * u0[ny - 2] * br;
        detail::solve_tridiagonal(A_lo, A_di, A_up, rhs, sol);

        f0[0] = bl;
        f0[ny - 1] = br;
        for (int j = 1; j + 1 < ny; ++j) f0[j] = sol[j - 1];
        for (int j = 0; j < ny; ++j) {
            if (!std::isfinite(f0[j]))
                throw numerical_error("solve_f: non-finite value at time step " +
                                      std::to_string(i) + " (t = " + std::to_string(t0) +
                                      ")");
        }

        l1 = l0;
        d1 = d0;
        u1 = u0;
        std::swap(g1, g0);
    }

    surf.peclet_warning = surf.max_cell_peclet > 1.0;
    for (int i = 0; i < nt; ++i)
        detail::differentiate_row(&surf.f[static_cast<std::size_t>(i) * ny], ny, h,
                                  &surf.f_y[static_cast<std::size_t>(i) * ny]);
    return surf;
}

// Bilinear interpolation; exact at nodes; refuses to extrapolate.
inline std::pair<double, double> surface_lookup(const SolutionSurface& surf, double t,
                                                double y) {
    const auto& ts = surf.times;
    const auto& ys = surf.states;
    if (t < ts.front() || t > ts.back() || y < ys.front() || y > ys.back())
        throw std::domain_error("surface_lookup: query outside the grid (no extrapolation)");

    const auto cell = [](const std::vector<double>& v, double x) {
        auto it = std::upper_bound(v.begin(), v.end(), x);
        int i = static_cast<int>(it - v.begin()) - 1;
        return std::clamp(i, 0, static_cast<int>(v.size()) - 2);
    };
    const int i = cell(ts, t);
    const int j = cell(ys, y);
    const double wt = (t - ts[i]) / (ts[i + 1] - ts[i]);
    const double wy = (y - ys[j]) / (ys[j + 1] - ys[j]);

    const auto blend = [&](const std::vector<double>& m) {
        const std::size_t ny = ys.size();
        const double v00 = m[static_cast<std::size_t>(i) * ny + j];
        const double v01 = m[static_cast<std::size_t>(i) * ny + j + 1];
        const double v10 = m[static_cast<std::size_t>(i + 1) * ny + j];
        const double v11 = m[static_cast<std::size_t>(i + 1) * ny + j + 1];
        return (1.0 - wt) * ((1.0 - wy) * v00 + wy * v01) +
               wt * ((1.0 - wy) * v10 + wy * v11);
    };
    return {blend(surf.f), blend(surf.f_y)};
}

// Same layout as solve_f but every node evaluated from the stochastic
// representation; the independent backend for cross-validation and exports.
inline SolutionSurface quadrature_surface(const MarketParams& mp, const Prior& pr,
                                          const GridSpec& grid,
                                          const QuadratureConfig& cfg = {}) {
    mp.validate();
    pr.validate();
    grid.validate();
    SolutionSurface surf;
    surf.grid = grid;
    surf.provenance = SurfaceProvenance::Quadrature;
    const int ny = grid.n_y, nt = grid.n_t;
    surf.times.resize(nt);
    surf.states.resize(ny);
    const double dt = mp.T / (nt - 1);
    const double h = (grid.y_max - grid.y_min) / (ny - 1);
    for (int i = 0; i < nt; ++i) surf.times[i] = i * dt;
    surf.times.back() = mp.T;
    for (int j = 0; j < ny; ++j) surf.states[j] = grid.y_min + j * h;
    surf.states.back() = grid.y_max;
    surf.f.assign(static_cast<std::size_t>(nt) * ny, 0.0);
    surf.f_y.assign(static_cast<std::size_t>(nt) * ny, 0.0);
    if (pr.sigma0_sq == 0.0) return surf;
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < ny; ++j) {
            surf.f[static_cast<std::size_t>(i) * ny + j] =
                f_quadrature(mp, pr, surf.times[i], surf.states[j], cfg);
            surf.f_y[static_cast<std::size_t>(i) * ny + j] =
                fy_quadrature(mp, pr, surf.times[i], surf.states[j], cfg);
        }
    }
    return surf;
}

}  // namespace rpsel
