#pragma once

#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "rpsel/strategy.hpp"

namespace rpsel {

enum class DriftMode { PriorDraw, Fixed, WorstCase };

inline const char* to_string(DriftMode m) {
    switch (m) {
        case DriftMode::PriorDraw: return "prior-draw";
        case DriftMode::Fixed: return "fixed";
        default: return "worst-case";
    }
}

struct ScenarioConfig {
    int n_paths = 10000;
    int n_steps = 500;
    std::uint64_t seed = 1;
    DriftMode drift_mode = DriftMode::PriorDraw;
    double fixed_mu = 0.0;
    double initial_wealth = 1.0;

    void validate() const {
        if (n_paths < 1) throw std::invalid_argument("scenario.n_paths must be >= 1");
        if (n_steps < 1) throw std::invalid_argument("scenario.n_steps must be >= 1");
        if (drift_mode == DriftMode::Fixed && !std::isfinite(fixed_mu))
            throw std::invalid_argument("scenario.fixed_mu must be finite");
        if (!std::isfinite(initial_wealth))
            throw std::invalid_argument("scenario.initial_wealth must be finite");
    }
};

struct StrategySpec {
    enum class Kind { Robust, PartialInfo, Merton, Constant };
    Kind kind = Kind::Robust;
    double constant_pi = 0.0;

    std::string name() const {
        switch (kind) {
            case Kind::Robust: return "robust";
            case Kind::PartialInfo: return "partial-info";
            case Kind::Merton: return "merton";
            default: return "constant";
        }
    }
};

struct StrategyStats {
    std::string name;
    double mean_wealth = 0.0;
    double wealth_variance = 0.0;
    double mean_utility = 0.0;
    double certainty_equivalent = 0.0;
    double min_wealth = 0.0;
    double max_wealth = 0.0;
    long paths_used = 0;
};

struct SimulationDiagnostics {
    double y_mean_z = 0.0;  // z-scores of terminal-Y moments vs the closed-form law
    double y_var_z = 0.0;
    long nonfinite_paths = 0;
};

struct SimulationResult {
    std::vector<StrategyStats> per_strategy;
    SimulationDiagnostics diagnostics;
};

// Full record of one path, for hand-traced tests and filter-consistency checks.
struct PathTrace {
    double mu = 0.0;
    std::vector<double> times;
    std::vector<double> w;                       // Brownian path driving the run
    std::vector<double> z;                       // log-price displacement (exact-Y modes)
    std::vector<std::vector<double>> y;          // belief per strategy
    std::vector<std::vector<double>> pi;         // position per strategy
    std::vector<std::vector<double>> wealth;     // undiscounted wealth per strategy
    std::vector<std::vector<double>> mu_played;  // drift per strategy (worst-case mode)
};

namespace detail {

// Neumaier-compensated running sum: makes aggregation insensitive to path
// ordering at the level the tests pin down.
struct CompensatedSum {
    double s = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

struct PathOutcome {
    std::vector<double> terminal_wealth;  // per strategy
    double y_terminal = 0.0;
};

inline double eval_strategy(const MarketParams& mp, const Prior& pr,
                            const StrategySpec& spec, const SolutionSurface* surf, double t,
                            double y, double& f_y_out) {
    f_y_out = 0.0;
    switch (spec.kind) {
        case StrategySpec::Kind::Robust: {
            if (pr.sigma0_sq == 0.0) return merton_strategy(mp, pr, t);
            f_y_out = surface_lookup(*surf, t, y).second;
            return robust_feedback(mp, pr, t, y, f_y_out).pi;
        }
        case StrategySpec::Kind::PartialInfo:
            return partial_info_strategy(mp, pr, t, y);
        case StrategySpec::Kind::Merton:
            return merton_strategy(mp, pr, t);
        default:
            return spec.constant_pi;
    }
}

inline PathOutcome simulate_path(const MarketParams& mp, const Prior& pr,
                                 const std::vector<StrategySpec>& strategies,
                                 const SolutionSurface* surf, const ScenarioConfig& cfg,
                                 std::uint64_t path_index, PathTrace* trace = nullptr) {
    const std::size_t ns = strategies.size();
    const double s2 = mp.sigma_sq();
    const double dt = mp.T / cfg.n_steps;
    const double sqrt_dt = std::sqrt(dt);
    const bool worst_case = cfg.drift_mode == DriftMode::WorstCase;
    const bool degenerate = pr.sigma0_sq == 0.0;

    NormalRng rng(path_seed(cfg.seed, path_index));
    double mu = 0.0;
    if (cfg.drift_mode == DriftMode::PriorDraw)
        mu = pr.y0 + std::sqrt(pr.sigma0_sq) * rng.gauss();
    else if (cfg.drift_mode == DriftMode::Fixed)
        mu = cfg.fixed_mu;

    std::vector<double> x_disc(ns, cfg.initial_wealth);  // e^{-rt} X(t)
    std::vector<double> y_state(ns, pr.y0);              // per strategy in worst-case mode
    double w = 0.0;
    double y_shared = pr.y0;

    if (trace) {
        trace->mu = mu;
        trace->times.assign(1, 0.0);
        trace->w.assign(1, 0.0);
        trace->z.assign(1, 0.0);
        trace->y.assign(ns, {pr.y0});
        trace->pi.assign(ns, {});
        trace->wealth.assign(ns, {cfg.initial_wealth});
        trace->mu_played.assign(ns, {});
    }

    for (int j = 0; j < cfg.n_steps; ++j) {
        const double t = j * dt;
        const double disc = std::exp(-mp.r * t);
        const double dw = sqrt_dt * rng.gauss();

        for (std::size_t s = 0; s < ns; ++s) {
            const double y = worst_case ? y_state[s] : y_shared;
            double f_y = 0.0;
            const double pi = eval_strategy(mp, pr, strategies[s], surf, t, y, f_y);
            double drift_mu = mu;
            if (worst_case) {
                if (degenerate) {
                    drift_mu = pr.y0;
                } else {
                    if (strategies[s].kind != StrategySpec::Kind::Robust)
                        f_y = surface_lookup(*surf, t, y).second;
                    drift_mu = worst_case_drift_selector(mp, pr, t, y, f_y, pi);
                }
                if (!degenerate) {
                    const double g = gamma_at(mp, pr, t);
                    y_state[s] += g / s2 * ((drift_mu - y) * dt + mp.sigma * dw);
                }
            }
            x_disc[s] += disc * pi * ((drift_mu - mp.r) * dt + mp.sigma * dw);
            if (trace) {
                trace->pi[s].push_back(pi);
                trace->mu_played[s].push_back(drift_mu);
            }
        }
        w += dw;

        const double t1 = (j + 1) * dt;
        if (!worst_case)
            y_shared = degenerate
                           ? pr.y0
                           : gamma_at(mp, pr, t1) *
                                 (mu * t1 / s2 + w / mp.sigma + pr.y0 / pr.sigma0_sq);
        if (trace) {
            trace->times.push_back(t1);
            trace->w.push_back(w);
            trace->z.push_back((mu - 0.5 * s2) * t1 + mp.sigma * w);
            for (std::size_t s = 0; s < ns; ++s) {
                trace->y[s].push_back(worst_case ? y_state[s] : y_shared);
                trace->wealth[s].push_back(std::exp(mp.r * t1) * x_disc[s]);
            }
        }
    }

    PathOutcome out;
    out.terminal_wealth.resize(ns);
    const double grow = std::exp(mp.r * mp.T);
    for (std::size_t s = 0; s < ns; ++s) out.terminal_wealth[s] = grow * x_disc[s];
    out.y_terminal = worst_case ? (ns ? y_state[0] : pr.y0) : y_shared;
    return out;
}

}  // namespace detail

// Monte Carlo experiment over a list of strategies sharing the same driving
// noise. Per-path generators split deterministically from the master seed and
// aggregation runs in a fixed order, so the result is bit-identical for any
// worker count.
inline SimulationResult simulate(const MarketParams& mp, const Prior& pr,
                                 const std::vector<StrategySpec>& strategies,
                                 const SolutionSurface* surface, const ScenarioConfig& cfg,
                                 int n_threads = 1,
                                 std::vector<double>* per_path_wealth = nullptr) {
    mp.validate();
    pr.validate();
    cfg.validate();
    if (strategies.empty()) throw std::invalid_argument("simulate: no strategies given");

    bool needs_surface = false;
    for (const auto& s : strategies)
        if (s.kind == StrategySpec::Kind::Robust) needs_surface = true;
    if (cfg.drift_mode == DriftMode::WorstCase) needs_surface = true;
    if (pr.sigma0_sq == 0.0) needs_surface = false;
    if (needs_surface) {
        if (surface == nullptr)
            throw std::invalid_argument("simulate: a solution surface is required");
        const double s0 = std::sqrt(pr.sigma0_sq);
        if (surface->states.front() > pr.y0 - 8.0 * s0 ||
            surface->states.back() < pr.y0 + 8.0 * s0)
            throw std::invalid_argument(
                "simulate: surface does not cover y0 +- 8 prior standard deviations");
    }

    const std::size_t ns = strategies.size();
    const int n = cfg.n_paths;
    std::vector<double> wealth(static_cast<std::size_t>(n) * ns);
    std::vector<double> y_term(n);

    const auto worker = [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            const auto out = detail::simulate_path(mp, pr, strategies, surface, cfg,
                                                   static_cast<std::uint64_t>(p));
            for (std::size_t s = 0; s < ns; ++s)
                wealth[static_cast<std::size_t>(p) * ns + s] = out.terminal_wealth[s];
            y_term[p] = out.y_terminal;
        }
    };
    if (n_threads <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n + n_threads - 1) / n_threads;
        for (int k = 0; k < n_threads; ++k) {
            const int lo = k * chunk;
            const int hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    if (per_path_wealth) *per_path_wealth = wealth;

    SimulationResult res;
    long nonfinite = 0;
    for (std::size_t s = 0; s < ns; ++s) {
        StrategyStats st;
        st.name = strategies[s].name();
        detail::CompensatedSum sum_w, sum_u;
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        long used = 0;
        for (int p = 0; p < n; ++p) {
            const double x = wealth[static_cast<std::size_t>(p) * ns + s];
            if (!std::isfinite(x)) {
                ++nonfinite;
                continue;
            }
            ++used;
            sum_w.add(x);
            sum_u.add(-std::exp(-mp.k * x) / mp.k);
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        if (used == 0) throw numerical_error("simulate: no finite paths for " + st.name);
        st.paths_used = used;
        st.mean_wealth = sum_w.value() / used;
        detail::CompensatedSum sq;
        for (int p = 0; p < n; ++p) {
            const double x = wealth[static_cast<std::size_t>(p) * ns + s];
            if (!std::isfinite(x)) continue;
            sq.add((x - st.mean_wealth) * (x - st.mean_wealth));
        }
        st.wealth_variance = used > 1 ? sq.value() / (used - 1) : 0.0;
        st.mean_utility = sum_u.value() / used;
        st.certainty_equivalent = -std::log(-mp.k * st.mean_utility) / mp.k;
        st.min_wealth = mn;
        st.max_wealth = mx;
        res.per_strategy.push_back(std::move(st));
    }

    res.diagnostics.nonfinite_paths = nonfinite;
    if (nonfinite > 0.001 * static_cast<double>(n) * static_cast<double>(ns))
        throw numerical_error("simulate: non-finite wealth on more than 0.1% of paths (" +
                              std::to_string(nonfinite) + ")");

    if (cfg.drift_mode == DriftMode::PriorDraw && pr.sigma0_sq > 0.0 && n > 1) {
        const auto [law_mean, law_var] = y_marginal_law(mp, pr, mp.T);
        detail::CompensatedSum sy;
        for (int p = 0; p < n; ++p) sy.add(y_term[p]);
        const double mean_y = sy.value() / n;
        detail::CompensatedSum syy;
        for (int p = 0; p < n; ++p) syy.add((y_term[p] - mean_y) * (y_term[p] - mean_y));
        const double var_y = syy.value() / (n - 1);
        res.diagnostics.y_mean_z = (mean_y - law_mean) / std::sqrt(law_var / n);
        res.diagnostics.y_var_z =
            (var_y - law_var) / (law_var * std::sqrt(2.0 / (n - 1)));
    }
    return res;
}

// One fully recorded path, sharing the exact stepping code with simulate().
inline PathTrace trace_path(const MarketParams& mp, const Prior& pr,
                            const std::vector<StrategySpec>& strategies,
                            const SolutionSurface* surface, const ScenarioConfig& cfg,
                            std::uint64_t path_index) {
    PathTrace tr;
    detail::simulate_path(mp, pr, strategies, surface, cfg, path_index, &tr);
    return tr;
}

}  // namespace rpsel
