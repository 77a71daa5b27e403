#pragma once

// Chain and price-distribution files.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "bayescrr/csv.hpp"
#include "bayescrr/diagnostics.hpp"
#include "bayescrr/error.hpp"
#include "bayescrr/mcmc.hpp"
#include "bayescrr/propagation.hpp"

namespace bayescrr {

/// One row per kept sample: iteration,u_star,d_star,sigma2_u,sigma2_d,p.
inline void write_chain_csv(std::ostream& out, const Chain& chain) {
    out << "iteration";
    for (auto f : theta_fields) out << ',' << f;
    out << '\n';
    for (std::size_t i = 0; i < chain.samples.size(); ++i) {
        out << chain.kept_iterations[i];
        for (std::size_t f = 0; f < theta_fields.size(); ++f)
            out << ',' << csv::format_double(theta_field(chain.samples[i], f));
        out << '\n';
    }
}

/// Reads the samples back; tuning and acceptance bookkeeping are not stored.
inline Chain read_chain_csv(std::istream& in, std::string_view source = "<chain>") {
    std::string line;
    std::size_t line_no = 0;
    auto error = [&](const std::string& what) {
        return validation_error(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(in, line)) throw validation_error(std::string(source) + ": empty chain file");
    ++line_no;
    const auto header = csv::split(line);
    if (header.size() != 6 || header[0] != "iteration") throw error("unexpected chain header");
    for (std::size_t f = 0; f < theta_fields.size(); ++f)
        if (header[f + 1] != theta_fields[f]) throw error("unexpected chain header");
    Chain chain;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split(line);
        if (cells.size() != 6) throw error("expected 6 fields");
        double v[6];
        for (std::size_t k = 0; k < 6; ++k) {
            const auto parsed = csv::parse_double(cells[k]);
            if (!parsed) throw error("malformed number");
            v[k] = *parsed;
        }
        if (!(v[3] > 0.0 && v[4] > 0.0 && v[5] > 0.0 && v[5] < 1.0)) throw error("sample outside parameter support");
        chain.kept_iterations.push_back(static_cast<std::size_t>(v[0]));
        chain.samples.push_back(ThetaSample{v[1], v[2], v[3], v[4], v[5]});
    }
    if (chain.samples.empty()) throw validation_error(std::string(source) + ": chain has no samples");
    return chain;
}

inline nlohmann::json to_json(const PriceSummary& s) {
    nlohmann::json j{{"count", s.count}, {"mean", s.mean},   {"median", s.median}, {"sd", s.sd},
                     {"std_error", s.std_error}, {"p0.5", s.lower}, {"p99.5", s.upper}, {"width", s.width}};
    auto& pct = j["percentiles"] = nlohmann::json::array();
    for (const auto& [level, value] : s.percentiles) pct.push_back({{"level", level}, {"value", value}});
    return j;
}

inline nlohmann::json to_json(const ChainDiagnostics& d) {
    nlohmann::json j;
    for (Param p : metropolis_params) j["acceptance_rate"][std::string(to_string(p))] = d.acceptance_rates[index_of(p)];
    for (std::size_t f = 0; f < theta_fields.size(); ++f) {
        auto& entry = j["parameters"][std::string(theta_fields[f])];
        entry["acf_degenerate"] = d.acf[f].degenerate;
        entry["acf"] = d.acf[f].values;
        entry["histogram"] = {{"lower", d.histograms[f].lower},
                              {"upper", d.histograms[f].upper},
                              {"counts", d.histograms[f].counts}};
    }
    return j;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + path.string() + "'");
    return out;
}

/// `<stem>.csv` with one price per line and `<stem>.json` with the summary.
inline void write_distribution(const std::filesystem::path& directory, const std::string& stem,
                               const PriceDistribution& dist, const PriceSummary& summary) {
    {
        auto out = open_output(directory / (stem + ".csv"));
        out << "price\n";
        for (double v : dist.samples) out << csv::format_double(v) << '\n';
    }
    auto out = open_output(directory / (stem + ".json"));
    nlohmann::json j = to_json(summary);
    j["method"] = std::string(to_string(dist.method));
    out << j.dump(2) << '\n';
}

inline std::vector<double> read_distribution_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::trim(line) != "price") throw validation_error("distribution file: bad header");
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        const auto v = csv::parse_double(line);
        if (!v) throw validation_error("distribution file: malformed number");
        out.push_back(*v);
    }
    return out;
}

}  // namespace bayescrr
