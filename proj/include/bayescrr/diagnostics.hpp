#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "bayescrr/error.hpp"
#include "bayescrr/mcmc.hpp"

namespace bayescrr {

/// Columns of a chain, in export order.
inline constexpr std::array<std::string_view, 5> theta_fields{"u_star", "d_star", "sigma2_u", "sigma2_d", "p"};

inline double theta_field(const ThetaSample& t, std::size_t field) noexcept {
    switch (field) {
        case 0: return t.u_star;
        case 1: return t.d_star;
        case 2: return t.sigma2_u;
        case 3: return t.sigma2_d;
        default: return t.p;
    }
}

inline std::vector<double> chain_column(const Chain& chain, std::size_t field) {
    std::vector<double> out;
    out.reserve(chain.samples.size());
    for (const auto& t : chain.samples) out.push_back(theta_field(t, field));
    return out;
}

struct Autocorrelation {
    std::vector<double> values;  // lags 0..max_lag; empty when degenerate
    bool degenerate = false;     // zero variance
};

inline Autocorrelation autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n == 0) throw validation_error("autocorrelation: empty series");
    if (max_lag >= n) throw validation_error("autocorrelation: lag must be below the series length");
    // Mean about the first value, exact for constant series.
    double mean = 0.0;
    for (double v : x) mean += v - x[0];
    mean = x[0] + mean / static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    Autocorrelation acf;
    if (!(c0 > 0.0)) {
        acf.degenerate = true;
        return acf;
    }
    acf.values.resize(max_lag + 1);
    acf.values[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - mean) * (x[i + lag] - mean);
        acf.values[lag] = c / c0;
    }
    return acf;
}

struct Histogram {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; a constant series lands in one bin.
inline Histogram histogram(std::span<const double> x, std::size_t bins) {
    if (bins == 0) throw validation_error("histogram: need at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    if (x.empty()) return h;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    h.lower = *lo;
    h.upper = *hi;
    const double width = (h.upper - h.lower) / static_cast<double>(bins);
    for (double v : x) {
        std::size_t k = width > 0.0 ? static_cast<std::size_t>((v - h.lower) / width) : 0;
        h.counts[std::min(k, bins - 1)]++;
    }
    return h;
}

struct ChainDiagnostics {
    PerParam<double> acceptance_rates{};
    std::array<Autocorrelation, 5> acf;
    std::array<Histogram, 5> histograms;
};

inline ChainDiagnostics chain_diagnostics(const Chain& chain, std::size_t max_lag = 40, std::size_t bins = 50) {
    if (chain.samples.empty()) throw validation_error("chain_diagnostics: empty chain");
    ChainDiagnostics out;
    for (Param p : metropolis_params) out.acceptance_rates[index_of(p)] = chain.acceptance_rate(p);
    for (std::size_t f = 0; f < theta_fields.size(); ++f) {
        const auto column = chain_column(chain, f);
        out.acf[f] = autocorrelation(column, max_lag);
        out.histograms[f] = histogram(column, bins);
    }
    return out;
}

}  // namespace bayescrr
