// Command-line driver: calibration, PDE/quadrature surfaces, strategy
// evaluation, sensitivity sweeps, Monte Carlo experiments and the
// admissibility check, all emitting plot-ready CSV/JSON.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rpsel/rpsel.hpp"

namespace fs = std::filesystem;
using namespace rpsel;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<double> r, sigma, T, k, a, y0, sigma0_sq;
    std::optional<double> y_min, y_max, theta, quad_tol, fixed_mu, x0;
    std::optional<int> n_y, n_t, quad_nodes, n_paths, n_steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> quad_rule, drift_mode, output_dir, format;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON run configuration");
    cmd->add_option("--r", ov.r, "risk-free rate (per year)");
    cmd->add_option("--sigma", ov.sigma, "volatility (per sqrt(year))");
    cmd->add_option("--T", ov.T, "horizon (years)");
    cmd->add_option("--k", ov.k, "CARA risk aversion");
    cmd->add_option("--a", ov.a, "confidence multiplier");
    cmd->add_option("--y0", ov.y0, "prior drift mean");
    cmd->add_option("--sigma0-sq", ov.sigma0_sq, "prior drift variance");
    cmd->add_option("--y-min", ov.y_min, "grid lower state bound");
    cmd->add_option("--y-max", ov.y_max, "grid upper state bound");
    cmd->add_option("--n-y", ov.n_y, "grid state nodes");
    cmd->add_option("--n-t", ov.n_t, "grid time nodes");
    cmd->add_option("--theta", ov.theta, "time-stepping weight (0.5 CN, 1 implicit)");
    cmd->add_option("--quad-nodes", ov.quad_nodes, "Simpson nodes for the time integral");
    cmd->add_option("--quad-rule", ov.quad_rule, "composite-simpson | adaptive");
    cmd->add_option("--quad-tol", ov.quad_tol, "adaptive quadrature tolerance");
    cmd->add_option("--n-paths", ov.n_paths, "Monte Carlo paths");
    cmd->add_option("--n-steps", ov.n_steps, "time steps per path");
    cmd->add_option("--seed", ov.seed, "master seed");
    cmd->add_option("--drift-mode", ov.drift_mode, "prior-draw | fixed | worst-case");
    cmd->add_option("--fixed-mu", ov.fixed_mu, "drift for fixed mode");
    cmd->add_option("--x0", ov.x0, "initial wealth");
    cmd->add_option("--output-dir", ov.output_dir, "output directory");
    cmd->add_option("--format", ov.format, "csv | json");
}

RunConfig make_config(const Overrides& ov) {
    RunConfig cfg = ov.config_path.empty() ? RunConfig{} : load_config(ov.config_path);
    if (ov.r) cfg.market.r = *ov.r;
    if (ov.sigma) cfg.market.sigma = *ov.sigma;
    if (ov.T) cfg.market.T = *ov.T;
    if (ov.k) cfg.market.k = *ov.k;
    if (ov.a) cfg.market.a = *ov.a;
    if (ov.y0) cfg.prior.y0 = *ov.y0;
    if (ov.sigma0_sq) cfg.prior.sigma0_sq = *ov.sigma0_sq;
    if (ov.y_min) cfg.grid.y_min = *ov.y_min;
    if (ov.y_max) cfg.grid.y_max = *ov.y_max;
    if (ov.n_y) cfg.grid.n_y = *ov.n_y;
    if (ov.n_t) cfg.grid.n_t = *ov.n_t;
    if (ov.theta) cfg.grid.theta = *ov.theta;
    if (ov.quad_nodes) cfg.quadrature.n_time_nodes = *ov.quad_nodes;
    if (ov.quad_rule) {
        if (*ov.quad_rule == "composite-simpson")
            cfg.quadrature.rule = QuadratureRule::CompositeSimpson;
        else if (*ov.quad_rule == "adaptive")
            cfg.quadrature.rule = QuadratureRule::Adaptive;
        else
            throw std::invalid_argument("--quad-rule must be composite-simpson or adaptive");
    }
    if (ov.quad_tol) cfg.quadrature.abs_tol = *ov.quad_tol;
    if (ov.n_paths) cfg.scenario.n_paths = *ov.n_paths;
    if (ov.n_steps) cfg.scenario.n_steps = *ov.n_steps;
    if (ov.seed) cfg.scenario.seed = *ov.seed;
    if (ov.drift_mode) {
        if (*ov.drift_mode == "prior-draw")
            cfg.scenario.drift_mode = DriftMode::PriorDraw;
        else if (*ov.drift_mode == "fixed")
            cfg.scenario.drift_mode = DriftMode::Fixed;
        else if (*ov.drift_mode == "worst-case")
            cfg.scenario.drift_mode = DriftMode::WorstCase;
        else
            throw std::invalid_argument("--drift-mode must be prior-draw, fixed or worst-case");
    }
    if (ov.fixed_mu) cfg.scenario.fixed_mu = *ov.fixed_mu;
    if (ov.x0) cfg.scenario.initial_wealth = *ov.x0;
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
    if (ov.format) {
        if (*ov.format == "csv")
            cfg.output_format = OutputFormat::Csv;
        else if (*ov.format == "json")
            cfg.output_format = OutputFormat::Json;
        else
            throw std::invalid_argument("--format must be csv or json");
    }
    cfg.validate();
    return cfg;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::invalid_argument("output_dir not writable: " + cfg.output_dir);
    return dir;
}

void write_table(const RunConfig& cfg, const fs::path& dir, const std::string& stem,
                 const std::string& csv_body, const nlohmann::ordered_json& json_body) {
    if (cfg.output_format == OutputFormat::Csv)
        write_text_file(dir / (stem + ".csv"), csv_body);
    else
        write_text_file(dir / (stem + ".json"), json_body.dump(2) + "\n");
}

SolutionSurface build_surface(const RunConfig& cfg, const std::string& backend) {
    if (backend == "fd") return solve_f(cfg.market, cfg.prior, cfg.grid, cfg.quadrature);
    if (backend == "quadrature")
        return quadrature_surface(cfg.market, cfg.prior, cfg.grid, cfg.quadrature);
    throw std::invalid_argument("--backend must be fd or quadrature");
}

std::vector<RegionRow> region_rows(const RunConfig& cfg, const SolutionSurface& surf) {
    std::vector<RegionRow> rows;
    for (int i = 0; i < surf.n_t(); ++i) {
        const double t = surf.times[i];
        if (!(t < cfg.market.T)) continue;
        try {
            const auto regions = classify_regions(cfg.market, cfg.prior, t, surf);
            const double c = cfg.market.a * std::sqrt(gamma_at(cfg.market, cfg.prior, t));
            if (regions.size() == 3) {
                rows.push_back({t, regions[0].upper, cfg.market.r - c,
                                regions[1].inner_crossing, cfg.market.r + c,
                                regions[1].upper});
            } else {  // a == 0: two regions meeting at r
                rows.push_back({t, cfg.market.r, cfg.market.r, cfg.market.r, cfg.market.r,
                                cfg.market.r});
            }
        } catch (const std::invalid_argument& e) {
            std::cerr << "note: regions skipped at t=" << t << ": " << e.what() << "\n";
        }
    }
    return rows;
}

int run_estimate(const Overrides& ov, const std::string& input, double delta_years) {
    RunConfig cfg = make_config(ov);
    const auto series = read_price_csv(input, delta_years);
    const auto est = estimate_params(series);
    const auto dir = prepare_output_dir(cfg);
    write_table(cfg, dir, "estimate", estimate_csv(est), estimate_json(est));
    std::cout << "sigma_hat=" << format_double(est.sigma_hat)
              << " y0_hat=" << format_double(est.y0_hat)
              << " sigma0_sq_hat=" << format_double(est.sigma0_sq_hat) << "\n";
    return 0;
}

int run_solve(const Overrides& ov, const std::string& backend) {
    RunConfig cfg = make_config(ov);
    const auto dir = prepare_output_dir(cfg);
    const auto surf = build_surface(cfg, backend);
    if (surf.peclet_warning)
        std::cerr << "warning: max cell Peclet " << format_double(surf.max_cell_peclet)
                  << " > 1; refine n_y or use theta=1\n";
    write_table(cfg, dir, "surface", surface_table_csv(cfg.market, cfg.prior, surf),
                surface_table_json(cfg.market, cfg.prior, surf));
    const auto rows = region_rows(cfg, surf);
    write_table(cfg, dir, "regions", regions_csv(rows), regions_json(rows));
    std::cout << "surface " << surf.n_t() << "x" << surf.n_y() << " written to "
              << cfg.output_dir << "\n";
    return 0;
}

int run_strategy_at(const Overrides& ov, double t, double y, const std::string& backend) {
    RunConfig cfg = make_config(ov);
    const auto dir = prepare_output_dir(cfg);
    double f_val = 0.0, fy_val = 0.0;
    if (cfg.prior.sigma0_sq == 0.0) {
        f_val = 0.0;
        fy_val = 0.0;
    } else if (backend == "quadrature") {
        f_val = f_quadrature(cfg.market, cfg.prior, t, y, cfg.quadrature);
        fy_val = fy_quadrature(cfg.market, cfg.prior, t, y, cfg.quadrature);
    } else if (backend == "fd") {
        const auto surf = solve_f(cfg.market, cfg.prior, cfg.grid, cfg.quadrature);
        std::tie(f_val, fy_val) = surface_lookup(surf, t, y);
    } else {
        throw std::invalid_argument("--backend must be fd or quadrature");
    }
    const auto dec = robust_feedback(cfg.market, cfg.prior, t, y, fy_val);
    std::string csv =
        "t,y,f,f_y,pi,regime,mu_worst,mu_any_in_set,myopic,hedging\n" + format_double(t) +
        "," + format_double(y) + "," + format_double(f_val) + "," + format_double(fy_val) +
        "," + format_double(dec.pi) + "," + to_string(dec.regime) + "," +
        format_double(dec.mu_worst) + "," + (dec.mu_any_in_set ? "true" : "false") + "," +
        format_double(dec.myopic) + "," + format_double(dec.hedging) + "\n";
    nlohmann::ordered_json obj = {{"t", t},
                                  {"y", y},
                                  {"f", f_val},
                                  {"f_y", fy_val},
                                  {"pi", dec.pi},
                                  {"regime", to_string(dec.regime)},
                                  {"mu_worst", dec.mu_worst},
                                  {"mu_any_in_set", dec.mu_any_in_set},
                                  {"myopic", dec.myopic},
                                  {"hedging", dec.hedging}};
    write_table(cfg, dir, "strategy_at", csv, obj);
    std::cout << "pi=" << format_double(dec.pi) << " regime=" << to_string(dec.regime)
              << " mu_worst=" << format_double(dec.mu_worst)
              << " myopic=" << format_double(dec.myopic)
              << " hedging=" << format_double(dec.hedging) << "\n";
    return 0;
}

int run_sweep(const Overrides& ov, const std::string& parameter,
              const std::vector<double>& values, std::vector<double> y_points) {
    RunConfig cfg = make_config(ov);
    if (parameter != "a" && parameter != "sigma0_sq" && parameter != "sigma")
        throw std::invalid_argument("--parameter must be one of: a, sigma0_sq, sigma");
    if (values.empty()) throw std::invalid_argument("--values must not be empty");
    if (y_points.empty()) y_points = {0.5};
    const auto dir = prepare_output_dir(cfg);

    std::vector<SweepRow> rows;
    for (double v : values) {
        MarketParams mp = cfg.market;
        Prior pr = cfg.prior;
        if (parameter == "a")
            mp.a = v;
        else if (parameter == "sigma0_sq")
            pr.sigma0_sq = v;
        else
            mp.sigma = v;
        for (double y : y_points) {
            SweepRow row{parameter, v, y, 0.0, ""};
            try {
                mp.validate();
                pr.validate();
                Prior pr_row = pr;
                pr_row.y0 = y;  // the time-0 state is the prior mean
                double fy = 0.0;
                if (pr.sigma0_sq > 0.0)
                    fy = mp.a == 0.0 ? closed_form_a0(mp, pr_row, 0.0).slope(y)
                                     : fy_quadrature(mp, pr_row, 0.0, y, cfg.quadrature);
                row.pi = robust_feedback(mp, pr_row, 0.0, y, fy).pi;
            } catch (const std::exception& e) {
                row.note = e.what();
            }
            rows.push_back(row);
        }
    }
    write_table(cfg, dir, "sweep", sweep_csv(rows), sweep_json(rows));
    std::cout << "sweep over " << parameter << ": " << rows.size() << " rows written to "
              << cfg.output_dir << "\n";
    return 0;
}

int run_simulate(const Overrides& ov, int threads, bool per_path,
                 std::optional<double> constant_pi) {
    RunConfig cfg = make_config(ov);
    const auto dir = prepare_output_dir(cfg);
    std::vector<StrategySpec> strategies{{StrategySpec::Kind::Robust, 0.0},
                                         {StrategySpec::Kind::PartialInfo, 0.0},
                                         {StrategySpec::Kind::Merton, 0.0}};
    if (constant_pi) strategies.push_back({StrategySpec::Kind::Constant, *constant_pi});

    SolutionSurface surf;
    const SolutionSurface* surf_ptr = nullptr;
    if (cfg.prior.sigma0_sq > 0.0) {
        surf = solve_f(cfg.market, cfg.prior, cfg.grid, cfg.quadrature);
        surf_ptr = &surf;
    }
    std::vector<double> per_path_wealth;
    const auto res = simulate(cfg.market, cfg.prior, strategies, surf_ptr, cfg.scenario,
                              threads, per_path ? &per_path_wealth : nullptr);
    write_table(cfg, dir, "report", report_csv(res), report_json(res));
    if (per_path) {
        std::string csv = "path";
        for (const auto& s : strategies) csv += "," + s.name();
        csv += "\n";
        for (int p = 0; p < cfg.scenario.n_paths; ++p) {
            csv += std::to_string(p);
            for (std::size_t s = 0; s < strategies.size(); ++s)
                csv += "," + format_double(per_path_wealth[p * strategies.size() + s]);
            csv += "\n";
        }
        write_text_file(dir / "per_path.csv", csv);
    }
    std::cout << utility_report(res);
    if (res.diagnostics.nonfinite_paths > 0)
        std::cerr << "note: " << res.diagnostics.nonfinite_paths
                  << " non-finite path outcomes\n";
    return 0;
}

int run_check(const Overrides& ov, long budget, std::optional<double> d1,
              std::optional<double> d7, std::optional<double> e3) {
    RunConfig cfg = make_config(ov);
    const auto dir = prepare_output_dir(cfg);
    AdmissibilityWitness w{};
    bool found = false;
    if (d1 || d7 || e3) {
        if (!(d1 && d7 && e3))
            throw std::invalid_argument("--delta1, --delta7, --epsilon3 must be given together");
        w = evaluate_admissibility(cfg.market, cfg.prior, *d1, *d7, *e3);
        found = w.valid();
    } else {
        const auto rep = check_admissibility(cfg.market, cfg.prior, budget);
        w = rep.best;
        found = rep.found;
    }
    std::string csv =
        "delta1,delta7,delta8,epsilon3,lhs1,lhs2,lhs2_alt,found\n" + format_double(w.delta1) +
        "," + format_double(w.delta7) + "," + format_double(w.delta8) + "," +
        format_double(w.epsilon3) + "," + format_double(w.lhs1) + "," +
        format_double(w.lhs2) + "," + format_double(w.lhs2_alt) + "," +
        (found ? "true" : "false") + "\n";
    nlohmann::ordered_json obj = {{"delta1", w.delta1},   {"delta7", w.delta7},
                                  {"delta8", w.delta8},   {"epsilon3", w.epsilon3},
                                  {"lhs1", w.lhs1},       {"lhs2", w.lhs2},
                                  {"lhs2_alt", w.lhs2_alt}, {"found", found}};
    write_table(cfg, dir, "admissibility", csv, obj);
    std::cout << "delta1=" << format_double(w.delta1) << " delta7=" << format_double(w.delta7)
              << " delta8=" << format_double(w.delta8)
              << " epsilon3=" << format_double(w.epsilon3)
              << " lhs1=" << format_double(w.lhs1) << " lhs2=" << format_double(w.lhs2)
              << " lhs2_alt=" << format_double(w.lhs2_alt)
              << (found ? " witness-found" : " witness-not-found") << "\n";
    return found ? 0 : 3;
}

int run_export_surface(const Overrides& ov, const std::string& backend,
                       std::string output) {
    RunConfig cfg = make_config(ov);
    const auto dir = prepare_output_dir(cfg);
    const auto surf = build_surface(cfg, backend);
    if (output.empty())
        output = (dir / (cfg.output_format == OutputFormat::Csv ? "surface_export.csv"
                                                                : "surface_export.json"))
                     .string();
    if (cfg.output_format == OutputFormat::Csv)
        write_text_file(output, surface_table_csv(cfg.market, cfg.prior, surf));
    else
        write_text_file(output,
                        surface_table_json(cfg.market, cfg.prior, surf).dump(2) + "\n");
    std::cout << "surface exported to " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust portfolio selection under a learning-driven confidence set"};
    app.require_subcommand(1);

    Overrides ov_estimate, ov_solve, ov_strategy, ov_sweep, ov_simulate, ov_check, ov_export;

    auto* cmd_estimate =
        app.add_subcommand("estimate", "Maximum-likelihood calibration from a price CSV");
    std::string input;
    double delta_years = 1.0 / 252.0;
    cmd_estimate->add_option("--input", input, "CSV with header date,close")->required();
    cmd_estimate->add_option("--delta-years", delta_years, "sampling interval in years");
    add_common_options(cmd_estimate, ov_estimate);

    auto* cmd_solve = app.add_subcommand("solve", "Solve f(t,y) and export surfaces/regions");
    std::string solve_backend = "fd";
    cmd_solve->add_option("--backend", solve_backend, "fd | quadrature");
    add_common_options(cmd_solve, ov_solve);

    auto* cmd_strategy = app.add_subcommand("strategy-at", "Evaluate the feedback at (t,y)");
    double at_t = 0.0, at_y = 0.0;
    std::string strategy_backend = "quadrature";
    cmd_strategy->add_option("--t", at_t, "time")->required();
    cmd_strategy->add_option("--y", at_y, "posterior drift mean")->required();
    cmd_strategy->add_option("--backend", strategy_backend, "quadrature | fd");
    add_common_options(cmd_strategy, ov_strategy);

    auto* cmd_sweep = app.add_subcommand("sweep", "Sensitivity of pi*(0) to a parameter");
    std::string sweep_parameter;
    std::vector<double> sweep_values, sweep_y_points;
    cmd_sweep->add_option("--parameter", sweep_parameter, "a | sigma0_sq | sigma")
        ->required();
    cmd_sweep->add_option("--values", sweep_values, "parameter values")
        ->required()
        ->delimiter(',');
    cmd_sweep->add_option("--y-points", sweep_y_points, "time-0 states (default 0.5)")
        ->delimiter(',');
    add_common_options(cmd_sweep, ov_sweep);

    auto* cmd_simulate =
        app.add_subcommand("simulate", "Monte Carlo comparison of the strategies");
    int threads = 1;
    bool per_path = false;
    std::optional<double> constant_pi;
    cmd_simulate->add_option("--threads", threads, "worker threads");
    cmd_simulate->add_flag("--per-path", per_path, "also write per-path terminal wealth");
    cmd_simulate->add_option("--constant-pi", constant_pi, "add a constant-position strategy");
    add_common_options(cmd_simulate, ov_simulate);

    auto* cmd_check = app.add_subcommand("check", "Admissibility witness for the strategy");
    long budget = 100000;
    std::optional<double> d1, d7, e3;
    cmd_check->add_option("--budget", budget, "search budget (evaluations)");
    cmd_check->add_option("--delta1", d1, "fix delta1 instead of searching");
    cmd_check->add_option("--delta7", d7, "fix delta7 instead of searching");
    cmd_check->add_option("--epsilon3", e3, "fix epsilon3 instead of searching");
    add_common_options(cmd_check, ov_check);

    auto* cmd_export = app.add_subcommand("export-surface", "Write a single surface table");
    std::string export_backend = "fd";
    std::string export_output;
    cmd_export->add_option("--backend", export_backend, "fd | quadrature");
    cmd_export->add_option("--output", export_output, "output file path");
    add_common_options(cmd_export, ov_export);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_estimate->parsed()) return run_estimate(ov_estimate, input, delta_years);
        if (cmd_solve->parsed()) return run_solve(ov_solve, solve_backend);
        if (cmd_strategy->parsed())
            return run_strategy_at(ov_strategy, at_t, at_y, strategy_backend);
        if (cmd_sweep->parsed())
            return run_sweep(ov_sweep, sweep_parameter, sweep_values, sweep_y_points);
        if (cmd_simulate->parsed())
            return run_simulate(ov_simulate, threads, per_path, constant_pi);
        if (cmd_check->parsed()) return run_check(ov_check, budget, d1, d7, e3);
        if (cmd_export->parsed())
            return run_export_surface(ov_export, export_backend, export_output);
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
