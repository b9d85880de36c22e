#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rpsel/csvio.hpp"

namespace rpsel {

// One JSON document drives a whole run; command-line flags override fields.
struct RunConfig {
    MarketParams market{0.018, 0.213, 0.5, 1.0, 1.96};
    Prior prior{0.174, 0.00908};
    GridSpec grid{};
    QuadratureConfig quadrature{};
    ScenarioConfig scenario{};
    std::string output_dir = "out";
    OutputFormat output_format = OutputFormat::Csv;

    void validate() const {
        market.validate();
        prior.validate();
        grid.validate();
        quadrature.validate();
        scenario.validate();
        if (output_dir.empty())
            throw std::invalid_argument("output_dir must not be empty");
    }
};

namespace detail {

inline void expect_keys(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                        const std::string& section) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : keys)
            if (key == k) known = true;
        if (!known)
            throw std::invalid_argument("config: unknown key '" + section + key + "'");
    }
}

inline double num(const nlohmann::json& obj, const char* key, double fallback,
                  const std::string& section) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw std::invalid_argument("config: " + section + key + " must be a number");
    return obj[key].get<double>();
}

inline long integer(const nlohmann::json& obj, const char* key, long fallback,
                    const std::string& section) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw std::invalid_argument("config: " + section + key + " must be an integer");
    return obj[key].get<long>();
}

inline std::string text(const nlohmann::json& obj, const char* key, std::string fallback,
                        const std::string& section) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string())
        throw std::invalid_argument("config: " + section + key + " must be a string");
    return obj[key].get<std::string>();
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& doc) {
    RunConfig cfg;
    detail::expect_keys(doc,
                        {"market", "prior", "grid", "quadrature", "scenario", "output_dir",
                         "output_format"},
                        "");
    if (doc.contains("market")) {
        const auto& m = doc["market"];
        detail::expect_keys(m, {"r", "sigma", "T", "k", "a"}, "market.");
        cfg.market.r = detail::num(m, "r", cfg.market.r, "market.");
        cfg.market.sigma = detail::num(m, "sigma", cfg.market.sigma, "market.");
        cfg.market.T = detail::num(m, "T", cfg.market.T, "market.");
        cfg.market.k = detail::num(m, "k", cfg.market.k, "market.");
        cfg.market.a = detail::num(m, "a", cfg.market.a, "market.");
    }
    if (doc.contains("prior")) {
        const auto& p = doc["prior"];
        detail::expect_keys(p, {"y0", "sigma0_sq"}, "prior.");
        cfg.prior.y0 = detail::num(p, "y0", cfg.prior.y0, "prior.");
        cfg.prior.sigma0_sq = detail::num(p, "sigma0_sq", cfg.prior.sigma0_sq, "prior.");
    }
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        detail::expect_keys(g, {"y_min", "y_max", "n_y", "n_t", "theta"}, "grid.");
        cfg.grid.y_min = detail::num(g, "y_min", cfg.grid.y_min, "grid.");
        cfg.grid.y_max = detail::num(g, "y_max", cfg.grid.y_max, "grid.");
        cfg.grid.n_y = static_cast<int>(detail::integer(g, "n_y", cfg.grid.n_y, "grid."));
        cfg.grid.n_t = static_cast<int>(detail::integer(g, "n_t", cfg.grid.n_t, "grid."));
        cfg.grid.theta = detail::num(g, "theta", cfg.grid.theta, "grid.");
    }
    if (doc.contains("quadrature")) {
        const auto& q = doc["quadrature"];
        detail::expect_keys(q, {"n_time_nodes", "rule", "abs_tol"}, "quadrature.");
        cfg.quadrature.n_time_nodes = static_cast<int>(
            detail::integer(q, "n_time_nodes", cfg.quadrature.n_time_nodes, "quadrature."));
        const std::string rule =
            detail::text(q, "rule", "composite-simpson", "quadrature.");
        if (rule == "composite-simpson")
            cfg.quadrature.rule = QuadratureRule::CompositeSimpson;
        else if (rule == "adaptive")
            cfg.quadrature.rule = QuadratureRule::Adaptive;
        else
            throw std::invalid_argument(
                "config: quadrature.rule must be 'composite-simpson' or 'adaptive'");
        cfg.quadrature.abs_tol =
            detail::num(q, "abs_tol", cfg.quadrature.abs_tol, "quadrature.");
    }
    if (doc.contains("scenario")) {
        const auto& s = doc["scenario"];
        detail::expect_keys(
            s, {"n_paths", "n_steps", "seed", "drift_mode", "fixed_mu", "initial_wealth"},
            "scenario.");
        cfg.scenario.n_paths =
            static_cast<int>(detail::integer(s, "n_paths", cfg.scenario.n_paths, "scenario."));
        cfg.scenario.n_steps =
            static_cast<int>(detail::integer(s, "n_steps", cfg.scenario.n_steps, "scenario."));
        cfg.scenario.seed = static_cast<std::uint64_t>(
            detail::integer(s, "seed", static_cast<long>(cfg.scenario.seed), "scenario."));
        const std::string mode = detail::text(s, "drift_mode", "prior-draw", "scenario.");
        if (mode == "prior-draw")
            cfg.scenario.drift_mode = DriftMode::PriorDraw;
        else if (mode == "fixed")
            cfg.scenario.drift_mode = DriftMode::Fixed;
        else if (mode == "worst-case")
            cfg.scenario.drift_mode = DriftMode::WorstCase;
        else
            throw std::invalid_argument(
                "config: scenario.drift_mode must be 'prior-draw', 'fixed' or 'worst-case'");
        cfg.scenario.fixed_mu = detail::num(s, "fixed_mu", cfg.scenario.fixed_mu, "scenario.");
        cfg.scenario.initial_wealth =
            detail::num(s, "initial_wealth", cfg.scenario.initial_wealth, "scenario.");
    }
    cfg.output_dir = detail::text(doc, "output_dir", cfg.output_dir, "");
    const std::string fmt = detail::text(doc, "output_format", "csv", "");
    if (fmt == "csv")
        cfg.output_format = OutputFormat::Csv;
    else if (fmt == "json")
        cfg.output_format = OutputFormat::Json;
    else
        throw std::invalid_argument("config: output_format must be 'csv' or 'json'");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config: JSON parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
    return config_from_json(doc);
}

}  // namespace rpsel
