#pragma once

// Synthetic close series and reduced-size run configurations shared by the
// rolling, CLI and acceptance tests.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "bayescrr/rolling.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace bayescrr;

/// Geometric random walk closes on consecutive business days.
inline PriceSeriesFile random_walk_series(std::size_t closes, std::uint64_t seed, double spot = 450.0,
                                          double sigma = 0.008, const std::string& start = "1992-01-02") {
    const auto values = oracle::random_walk_closes(spot, 1e-4, sigma, closes, seed);
    PriceSeriesFile s;
    Date d = Date::parse(start);
    for (double v : values) {
        s.dates.push_back(d);
        s.closes.push_back(v);
        s.market_option_price.push_back(std::nullopt);
        s.rate.push_back(std::nullopt);
        d = d.next_business_day();
    }
    return s;
}

/// Run configuration with small Monte Carlo sizes.
inline RunConfig fast_config(const PriceSeriesFile& series, std::size_t window, int horizon, double strike) {
    RunConfig c;
    c.window = window;
    c.strike = strike;
    Date m = series.dates[window];
    for (int i = 0; i < horizon; ++i) m = m.next_business_day();
    c.maturity = m;
    c.annual_rate = 0.03;
    c.mcmc.iterations = 2000;
    c.mcmc.burn_in = 500;
    c.theta = {300, 20, 1};
    c.xi.xi_draws = 1000;
    c.expected_xi = {300, 1};
    c.bootstrap = {300, 1};
    c.seed = 42;
    return c;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

/// Every regular file below `dir`, keyed by relative path.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).string()] = read_file(e.path());
    return out;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("bayescrr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture
