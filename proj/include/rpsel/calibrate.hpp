#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rpsel/core.hpp"

namespace rpsel {

struct PriceSeries {
    std::vector<std::string> timestamps;  // ISO-8601, strictly increasing
    std::vector<double> prices;           // strictly positive
    double delta_years = 1.0 / 252.0;

    std::size_t size() const { return prices.size(); }

    void validate() const {
        if (timestamps.size() != prices.size())
            throw std::invalid_argument("price series: timestamp/price count mismatch");
        if (!(delta_years > 0.0))
            throw std::invalid_argument("price series: delta_years must be > 0");
        for (std::size_t i = 0; i < prices.size(); ++i) {
            if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
                throw std::invalid_argument("price series: non-positive price at row " +
                                            std::to_string(i + 1));
            if (i > 0 && !(timestamps[i - 1] < timestamps[i]))
                throw std::invalid_argument(
                    "price series: timestamps not strictly increasing at row " +
                    std::to_string(i + 1));
        }
    }
};

struct CalibrationEstimate {
    double sigma_hat;
    double y0_hat;
    double sigma0_sq_hat;
};

// GBM maximum likelihood on log-returns u_i, no small-sample correction:
//   sigma^2 = Var_n[u]/dt,  y0 = mean[u]/dt + sigma^2/2,
// and the sampling variance of the drift estimate, sigma^2/(n dt), as the
// prior variance.
inline CalibrationEstimate estimate_params(const PriceSeries& series) {
    series.validate();
    if (series.size() < 30)
        throw std::invalid_argument(
            "calibration requires at least 30 observations, got " +
            std::to_string(series.size()));
    const std::size_t n = series.size() - 1;
    const double dt = series.delta_years;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = std::log(series.prices[i + 1] / series.prices[i]);
    double mean = 0.0;
    for (double v : u) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : u) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sigma_sq = var / dt;
    if (sigma_sq == 0.0)
        throw std::invalid_argument("calibration: constant price series (zero volatility)");
    const double y0 = mean / dt + 0.5 * sigma_sq;
    const double sigma0_sq = sigma_sq / (static_cast<double>(n) * dt);
    return {std::sqrt(sigma_sq), y0, sigma0_sq};
}

namespace detail {

inline bool iso_date_like(const std::string& s) {
    if (s.size() < 10) return false;
    for (int i = 0; i < 10; ++i) {
        if (i == 4 || i == 7) {
            if (s[i] != '-') return false;
        } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

// `date,close` with ISO-8601 dates and positive decimal closes; errors carry
// the offending 1-based data row.
inline PriceSeries read_price_csv(const std::string& path, double delta_years = 1.0 / 252.0) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open price file: " + path);
    PriceSeries out;
    out.delta_years = delta_years;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,close")
        throw std::invalid_argument(path + ": expected header 'date,close', got '" + line +
                                    "'");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument(path + ": missing comma at row " +
                                        std::to_string(row));
        const std::string date = line.substr(0, comma);
        const std::string close = line.substr(comma + 1);
        if (!detail::iso_date_like(date))
            throw std::invalid_argument(path + ": bad ISO-8601 date at row " +
                                        std::to_string(row));
        double price = 0.0;
        try {
            std::size_t used = 0;
            price = std::stod(close, &used);
            if (used != close.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument(path + ": bad close value at row " +
                                        std::to_string(row));
        }
        if (!(price > 0.0) || !std::isfinite(price))
            throw std::invalid_argument(path + ": non-positive close at row " +
                                        std::to_string(row));
        if (!out.timestamps.empty() && !(out.timestamps.back() < date))
            throw std::invalid_argument(path + ": dates not strictly increasing at row " +
                                        std::to_string(row));
        out.timestamps.push_back(date);
        out.prices.push_back(price);
    }
    return out;
}

}  // namespace rpsel
