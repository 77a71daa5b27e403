#pragma once

// Files written for a rolling run:
//   <method>_series.csv  date,periods,spot,mean,median,p0.5,p99.5,width,market,premium_mean,premium_p99.5
//   summary.csv          method,dates,mean,median,width (averages over non-gap dates)
//   summary.json         the same summary plus gaps and warnings
//   gaps.csv             date,reason
//   samples/<method>_<date>.csv  when samples were kept

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayescrr/csv.hpp"
#include "bayescrr/error.hpp"
#include "bayescrr/io.hpp"
#include "bayescrr/rolling.hpp"

namespace bayescrr {

inline constexpr std::string_view series_header =
    "date,periods,spot,mean,median,p0.5,p99.5,width,market,premium_mean,premium_p99.5";

/// Table-style row: averages over dates of the per-date summaries.
struct MethodAverage {
    Method method;
    std::size_t dates = 0;
    double mean = 0.0;
    double median = 0.0;
    double width = 0.0;
};

inline std::vector<MethodAverage> average_over_dates(const RollingReport& report) {
    std::vector<MethodAverage> out;
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
        MethodAverage avg{report.methods[k]};
        for (const auto& e : report.entries) {
            if (e.gap) continue;
            const auto& s = e.methods[k].summary;
            ++avg.dates;
            avg.mean += s.mean;
            avg.median += s.median;
            avg.width += s.width;
        }
        if (avg.dates > 0) {
            const double n = static_cast<double>(avg.dates);
            avg.mean /= n;
            avg.median /= n;
            avg.width /= n;
        }
        out.push_back(avg);
    }
    return out;
}

inline std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

inline void emit_report(const RollingReport& report, const std::filesystem::path& directory) {
    if (report.entries.empty()) throw validation_error("emit_report: report has no entries");
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec || !std::filesystem::is_directory(directory))
        throw validation_error("cannot create output directory '" + directory.string() + "'");
    using csv::format_double;
    using csv::format_optional;

    bool any_samples = false;
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
        auto out = open_output(directory / (std::string(to_string(report.methods[k])) + "_series.csv"));
        out << series_header << '\n';
        for (const auto& e : report.entries) {
            if (e.gap) continue;
            const auto& m = e.methods[k];
            const auto& s = m.summary;
            out << e.date.str() << ',' << e.periods << ',' << format_double(e.spot) << ',' << format_double(s.mean)
                << ',' << format_double(s.median) << ',' << format_double(s.lower) << ',' << format_double(s.upper)
                << ',' << format_double(s.width) << ',' << format_optional(e.market) << ','
                << format_optional(m.premium_mean) << ',' << format_optional(m.premium_upper) << '\n';
            any_samples = any_samples || !m.samples.empty();
        }
    }
    if (any_samples) {
        std::filesystem::create_directories(directory / "samples");
        for (const auto& e : report.entries)
            for (const auto& m : e.methods) {
                if (m.samples.empty()) continue;
                auto out = open_output(directory / "samples" / (std::string(to_string(m.method)) + "_" + e.date.str() + ".csv"));
                out << "price\n";
                for (double v : m.samples) out << format_double(v) << '\n';
            }
    }
    {
        auto out = open_output(directory / "gaps.csv");
        out << "date,reason\n";
        for (const auto& e : report.entries)
            if (e.gap) out << e.date.str() << ',' << sanitize(e.gap_reason) << '\n';
    }
    const auto averages = average_over_dates(report);
    {
        auto out = open_output(directory / "summary.csv");
        out << "method,dates,mean,median,width\n";
        for (const auto& a : averages)
            out << to_string(a.method) << ',' << a.dates << ',' << format_double(a.mean) << ','
                << format_double(a.median) << ',' << format_double(a.width) << '\n';
    }
    nlohmann::json j;
    j["dates"] = report.entries.size();
    j["methods"] = nlohmann::json::array();
    for (const auto& a : averages)
        j["methods"].push_back({{"method", std::string(to_string(a.method))},
                                {"dates", a.dates},
                                {"mean", a.mean},
                                {"median", a.median},
                                {"width", a.width}});
    j["gaps"] = nlohmann::json::array();
    for (const auto& e : report.entries)
        if (e.gap) j["gaps"].push_back({{"date", e.date.str()}, {"reason", e.gap_reason}});
    j["warnings"] = report.warnings;
    auto out = open_output(directory / "summary.json");
    out << j.dump(2) << '\n';
}

/// One parsed row of a <method>_series.csv file.
struct SeriesRow {
    Date date;
    int periods = 0;
    double spot = 0.0;
    double mean = 0.0, median = 0.0, lower = 0.0, upper = 0.0, width = 0.0;
    std::optional<double> market, premium_mean, premium_upper;
};

inline std::vector<SeriesRow> read_series_rows(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != series_header)
        throw validation_error("series file: unexpected header");
    std::vector<SeriesRow> rows;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        const auto c = csv::split(line);
        if (c.size() != 11) throw validation_error("series file: expected 11 fields");
        auto num = [](std::string_view s) {
            const auto v = csv::parse_double(s);
            if (!v) throw validation_error("series file: malformed number");
            return *v;
        };
        auto opt = [&](std::string_view s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return num(s);
        };
        rows.push_back(SeriesRow{Date::parse(c[0]), static_cast<int>(num(c[1])), num(c[2]), num(c[3]), num(c[4]),
                                 num(c[5]), num(c[6]), num(c[7]), opt(c[8]), opt(c[9]), opt(c[10])});
    }
    return rows;
}

inline std::vector<MethodAverage> read_summary_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "method,dates,mean,median,width")
        throw validation_error("summary file: unexpected header");
    std::vector<MethodAverage> rows;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        const auto c = csv::split(line);
        if (c.size() != 5) throw validation_error("summary file: expected 5 fields");
        const auto n = csv::parse_double(c[1]), mean = csv::parse_double(c[2]), median = csv::parse_double(c[3]),
                   width = csv::parse_double(c[4]);
        if (!n || !mean || !median || !width) throw validation_error("summary file: malformed number");
        rows.push_back({method_from_string(c[0]), static_cast<std::size_t>(*n), *mean, *median, *width});
    }
    return rows;
}

}  // namespace bayescrr
