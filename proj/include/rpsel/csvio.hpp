#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsel/calibrate.hpp"
#include "rpsel/simulate.hpp"
#include "rpsel/strategy.hpp"

namespace rpsel {

// Shortest round-trip decimal; the anchor of byte-deterministic exports.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("bad numeric field '" + s + "'");
    return v;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + path.string());
    out << content;
    if (!out) throw std::invalid_argument("failed writing file: " + path.string());
}

enum class OutputFormat { Csv, Json };

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

// --- surface ---------------------------------------------------------------

// Rows are t-major: one line per (t_i, y_j) with the robust feedback evaluated
// from the stored f_y at the node.
inline std::string surface_table_csv(const MarketParams& mp, const Prior& pr,
                                     const SolutionSurface& surf) {
    std::string out = "t,y,f,f_y,pi,regime\n";
    for (int i = 0; i < surf.n_t(); ++i) {
        for (int j = 0; j < surf.n_y(); ++j) {
            const auto dec =
                robust_feedback(mp, pr, surf.times[i], surf.states[j], surf.fy_at(i, j));
            out += format_double(surf.times[i]);
            out += ',';
            out += format_double(surf.states[j]);
            out += ',';
            out += format_double(surf.f_at(i, j));
            out += ',';
            out += format_double(surf.fy_at(i, j));
            out += ',';
            out += format_double(dec.pi);
            out += ',';
            out += to_string(dec.regime);
            out += '\n';
        }
    }
    return out;
}

inline nlohmann::ordered_json surface_table_json(const MarketParams& mp, const Prior& pr,
                                                 const SolutionSurface& surf) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int i = 0; i < surf.n_t(); ++i) {
        for (int j = 0; j < surf.n_y(); ++j) {
            const auto dec =
                robust_feedback(mp, pr, surf.times[i], surf.states[j], surf.fy_at(i, j));
            rows.push_back({{"t", surf.times[i]},
                            {"y", surf.states[j]},
                            {"f", surf.f_at(i, j)},
                            {"f_y", surf.fy_at(i, j)},
                            {"pi", dec.pi},
                            {"regime", to_string(dec.regime)}});
        }
    }
    return rows;
}

// Rebuilds a surface from the exported table; numeric fields are exact thanks
// to the shortest-round-trip formatting.
inline SolutionSurface read_surface_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open surface file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,y,f,f_y", 0) != 0)
        throw std::invalid_argument(path.string() + ": not a surface table");
    std::vector<double> t, y, f, fy;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 4)
            throw std::invalid_argument(path.string() + ": short row '" + line + "'");
        t.push_back(parse_double(cells[0]));
        y.push_back(parse_double(cells[1]));
        f.push_back(parse_double(cells[2]));
        fy.push_back(parse_double(cells[3]));
    }
    if (t.empty()) throw std::invalid_argument(path.string() + ": empty surface table");
    std::size_t ny = 1;
    while (ny < t.size() && t[ny] == t[0]) ++ny;
    if (t.size() % ny != 0)
        throw std::invalid_argument(path.string() + ": ragged surface table");
    const std::size_t nt = t.size() / ny;
    SolutionSurface surf;
    surf.states.assign(y.begin(), y.begin() + static_cast<long>(ny));
    surf.times.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) surf.times[i] = t[i * ny];
    surf.f = std::move(f);
    surf.f_y = std::move(fy);
    surf.grid.y_min = surf.states.front();
    surf.grid.y_max = surf.states.back();
    surf.grid.n_y = static_cast<int>(ny);
    surf.grid.n_t = static_cast<int>(nt);
    return surf;
}

// --- regions ---------------------------------------------------------------

struct RegionRow {
    double t;
    double y_low;
    double band_lo;
    double y_mid;
    double band_hi;
    double y_high;
};

inline std::string regions_csv(const std::vector<RegionRow>& rows) {
    std::string out = "t,y_low,band_lo,y_mid,band_hi,y_high\n";
    for (const auto& r : rows) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.y_low);
        out += ',';
        out += format_double(r.band_lo);
        out += ',';
        out += format_double(r.y_mid);
        out += ',';
        out += format_double(r.band_hi);
        out += ',';
        out += format_double(r.y_high);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json regions_json(const std::vector<RegionRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        arr.push_back({{"t", r.t},
                       {"y_low", r.y_low},
                       {"band_lo", r.band_lo},
                       {"y_mid", r.y_mid},
                       {"band_hi", r.band_hi},
                       {"y_high", r.y_high}});
    return arr;
}

// --- sweep -----------------------------------------------------------------

struct SweepRow {
    std::string parameter;
    double value;
    double y;
    double pi;
    std::string note;  // empty for clean rows, error text otherwise
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "parameter,value,y,pi,note\n";
    for (const auto& r : rows) {
        out += r.parameter;
        out += ',';
        out += format_double(r.value);
        out += ',';
        out += format_double(r.y);
        out += ',';
        out += r.note.empty() ? format_double(r.pi) : std::string();
        out += ',';
        out += r.note;
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json sweep_json(const std::vector<SweepRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json obj = {{"parameter", r.parameter},
                                      {"value", r.value},
                                      {"y", r.y}};
        if (r.note.empty())
            obj["pi"] = r.pi;
        else
            obj["note"] = r.note;
        arr.push_back(obj);
    }
    return arr;
}

// --- simulation report -----------------------------------------------------

inline std::string report_csv(const SimulationResult& res) {
    std::string out =
        "strategy,mean_utility,certainty_equivalent,mean_wealth,wealth_variance,"
        "min_wealth,max_wealth,paths_used\n";
    for (const auto& s : res.per_strategy) {
        out += s.name;
        out += ',';
        out += format_double(s.mean_utility);
        out += ',';
        out += format_double(s.certainty_equivalent);
        out += ',';
        out += format_double(s.mean_wealth);
        out += ',';
        out += format_double(s.wealth_variance);
        out += ',';
        out += format_double(s.min_wealth);
        out += ',';
        out += format_double(s.max_wealth);
        out += ',';
        out += std::to_string(s.paths_used);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json report_json(const SimulationResult& res) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : res.per_strategy)
        arr.push_back({{"strategy", s.name},
                       {"mean_utility", s.mean_utility},
                       {"certainty_equivalent", s.certainty_equivalent},
                       {"mean_wealth", s.mean_wealth},
                       {"wealth_variance", s.wealth_variance},
                       {"min_wealth", s.min_wealth},
                       {"max_wealth", s.max_wealth},
                       {"paths_used", s.paths_used}});
    return arr;
}

// Plain-text table for terminals; stable ordering, deterministic formatting.
inline std::string utility_report(const SimulationResult& res) {
    std::string out = "strategy       mean_utility          CE                    mean_wealth\n";
    for (const auto& s : res.per_strategy) {
        std::string row = s.name;
        row.resize(15, ' ');
        std::string mu = format_double(s.mean_utility);
        mu.resize(22, ' ');
        std::string ce = format_double(s.certainty_equivalent);
        ce.resize(22, ' ');
        out += row + mu + ce + format_double(s.mean_wealth) + "\n";
    }
    return out;
}

// --- calibration -----------------------------------------------------------

inline std::string estimate_csv(const CalibrationEstimate& est) {
    return "sigma_hat,y0_hat,sigma0_sq_hat\n" + format_double(est.sigma_hat) + "," +
           format_double(est.y0_hat) + "," + format_double(est.sigma0_sq_hat) + "\n";
}

inline nlohmann::ordered_json estimate_json(const CalibrationEstimate& est) {
    return {{"sigma_hat", est.sigma_hat},
            {"y0_hat", est.y0_hat},
            {"sigma0_sq_hat", est.sigma0_sq_hat}};
}

}  // namespace rpsel
