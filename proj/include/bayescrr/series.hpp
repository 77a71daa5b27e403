#pragma once

// Daily close series ingestion and rate conversion.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bayescrr/csv.hpp"
#include "bayescrr/error.hpp"

namespace bayescrr {

struct Date {
    std::chrono::sys_days days{};

    static Date parse(std::string_view s) {
        auto fail = [&] { throw validation_error("invalid ISO-8601 date '" + std::string(s) + "'"); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
        auto number = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i) {
                if (s[i] < '0' || s[i] > '9') fail();
                v = v * 10 + (s[i] - '0');
            }
            return v;
        };
        const std::chrono::year_month_day ymd{std::chrono::year{number(0, 4)},
                                              std::chrono::month{static_cast<unsigned>(number(5, 2))},
                                              std::chrono::day{static_cast<unsigned>(number(8, 2))}};
        if (!ymd.ok()) fail();
        return Date{std::chrono::sys_days{ymd}};
    }

    std::string str() const {
        const std::chrono::year_month_day ymd{days};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                      static_cast<unsigned>(ymd.day()));
        return buf;
    }

    std::int64_t serial() const noexcept { return days.time_since_epoch().count(); }

    bool is_weekday() const noexcept {
        const std::chrono::weekday wd{days};
        return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
    }

    Date next_business_day() const noexcept {
        Date d{days + std::chrono::days{1}};
        while (!d.is_weekday()) d.days += std::chrono::days{1};
        return d;
    }

    friend auto operator<=>(const Date&, const Date&) = default;
};

/// Weekdays in (from, to]; zero when to <= from. No holiday calendar.
inline int business_days_between(Date from, Date to) noexcept {
    int n = 0;
    for (auto d = from.days + std::chrono::days{1}; d <= to.days; d += std::chrono::days{1}) n += Date{d}.is_weekday();
    return n;
}

/// Validated daily series: strictly increasing dates, positive closes, and the
/// optional market option price and annualized risk-free rate columns.
struct PriceSeriesFile {
    std::vector<Date> dates;
    std::vector<double> closes;
    std::vector<std::optional<double>> market_option_price;
    std::vector<std::optional<double>> rate;
    bool has_market_column = false;
    bool has_rate_column = false;

    std::size_t size() const noexcept { return dates.size(); }

    /// close_t / close_{t-1}; element i belongs to dates[i + 1].
    std::vector<double> gross_returns() const {
        std::vector<double> out;
        for (std::size_t i = 1; i < closes.size(); ++i) out.push_back(closes[i] / closes[i - 1]);
        return out;
    }
};

/// Header-keyed CSV parsing; column order is free and unknown columns are
/// ignored. Errors name the offending line.
inline PriceSeriesFile parse_series(std::istream& in, std::string_view source = "<input>") {
    const std::string where(source);
    std::string line;
    std::size_t line_no = 0;
    auto error = [&](const std::string& what) {
        return validation_error(where + ":" + std::to_string(line_no) + ": " + what);
    };
    std::map<std::string, std::size_t, std::less<>> columns;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        for (std::size_t i = 0; i < cells.size(); ++i) columns.emplace(std::string(cells[i]), i);
        break;
    }
    if (columns.empty()) throw validation_error(where + ": missing header");
    if (!columns.contains("date") || !columns.contains("close"))
        throw error("header must contain 'date' and 'close' columns");
    const auto col_date = columns.at("date");
    const auto col_close = columns.at("close");
    const auto col_market = columns.find("market_option_price");
    const auto col_rate = columns.find("rate");

    PriceSeriesFile out;
    out.has_market_column = col_market != columns.end();
    out.has_rate_column = col_rate != columns.end();
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        if (cells.size() != columns.size()) throw error("expected " + std::to_string(columns.size()) + " fields");
        Date date;
        try {
            date = Date::parse(cells[col_date]);
        } catch (const validation_error& e) {
            throw error(e.what());
        }
        if (!out.dates.empty() && !(out.dates.back() < date))
            throw error("date " + date.str() + " is not after the previous row (duplicate or out of order)");
        const auto close = csv::parse_double(cells[col_close]);
        if (!close || !(*close > 0.0) || !std::isfinite(*close)) throw error("close must be a positive number");
        auto optional_cell = [&](auto it, const char* name) -> std::optional<double> {
            if (it == columns.end() || cells[it->second].empty()) return std::nullopt;
            const auto v = csv::parse_double(cells[it->second]);
            if (!v || !std::isfinite(*v)) throw error(std::string("malformed ") + name);
            return v;
        };
        out.dates.push_back(date);
        out.closes.push_back(*close);
        out.market_option_price.push_back(optional_cell(col_market, "market_option_price"));
        out.rate.push_back(optional_cell(col_rate, "rate"));
    }
    return out;
}

inline PriceSeriesFile load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open series file '" + path + "'");
    return parse_series(in, path);
}

inline void write_series(std::ostream& out, const PriceSeriesFile& series) {
    out << "date,close";
    if (series.has_market_column) out << ",market_option_price";
    if (series.has_rate_column) out << ",rate";
    out << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.dates[i].str() << ',' << csv::format_double(series.closes[i]);
        if (series.has_market_column) out << ',' << csv::format_optional(series.market_option_price[i]);
        if (series.has_rate_column) out << ',' << csv::format_optional(series.rate[i]);
        out << '\n';
    }
}

enum class DayBasis { business_252 };

inline DayBasis day_basis_from_string(std::string_view name) {
    if (name == "business_252") return DayBasis::business_252;
    throw validation_error("unknown day-count basis: " + std::string(name));
}

/// Per-period rate from an annualized quote: (1 + annual)^(1/252) - 1.
inline double per_period_rate(double annualized, DayBasis basis = DayBasis::business_252) {
    if (!(annualized >= -1.0) || !std::isfinite(annualized)) throw validation_error("annualized rate must be >= -1");
    switch (basis) {
        case DayBasis::business_252: return std::expm1(std::log1p(annualized) / 252.0);
    }
    throw validation_error("unknown day-count basis");
}

inline double per_period_rate(double annualized, std::string_view basis) {
    return per_period_rate(annualized, day_basis_from_string(basis));
}

}  // namespace bayescrr
