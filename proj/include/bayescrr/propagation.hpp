#pragma once

// Turning a posterior chain into a distribution of option prices: the theta
// method (per-theta averaged prices), the xi method (binned posterior
// predictive of (u, d)) and the expected-xi method (prices at E(u), E(d)).

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bayescrr/error.hpp"
#include "bayescrr/mcmc.hpp"
#include "bayescrr/parallel.hpp"
#include "bayescrr/random.hpp"
#include "bayescrr/stats.hpp"
#include "bayescrr/tree.hpp"

namespace bayescrr {

enum class Method { theta, xi, expected_xi, sm, bm, bv };

inline constexpr std::array<Method, 6> all_methods{Method::xi, Method::theta, Method::expected_xi,
                                                   Method::sm, Method::bm,    Method::bv};

inline std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::theta: return "theta";
        case Method::xi: return "xi";
        case Method::expected_xi: return "expected_xi";
        case Method::sm: return "sm";
        case Method::bm: return "bm";
        case Method::bv: return "bv";
    }
    return "?";
}

inline Method method_from_string(std::string_view name) {
    for (Method m : all_methods)
        if (to_string(m) == name) return m;
    throw validation_error("unknown method: " + std::string(name));
}

/// Monte Carlo sample of option prices.
struct PriceDistribution {
    std::vector<double> samples;
    Method method = Method::theta;
};

/// Mean computed as x0 + sum(x_i - x0)/n: exact for constant samples.
inline double shifted_mean(std::span<const double> x) noexcept {
    if (x.empty()) return 0.0;
    const double origin = x.front();
    double acc = 0.0;
    for (double v : x) acc += v - origin;
    return origin + acc / static_cast<double>(x.size());
}

/// Order statistic with linear interpolation between closest ranks
/// (h = (n-1) * level). `sorted` must be ascending.
inline double quantile_sorted(std::span<const double> sorted, double level) {
    if (sorted.empty()) throw validation_error("quantile: empty sample");
    if (!(level >= 0.0 && level <= 1.0)) throw validation_error("quantile: level outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || sorted[hi] == sorted[lo]) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline constexpr double interval_lower_level = 0.005;
inline constexpr double interval_upper_level = 0.995;

struct PriceSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double std_error = 0.0;
    double median = 0.0;
    double lower = 0.0;  // 0.5% percentile
    double upper = 0.0;  // 99.5% percentile
    double width = 0.0;
    std::vector<std::pair<double, double>> percentiles;
};

inline PriceSummary summarize(const PriceDistribution& dist, std::span<const double> levels = {}) {
    if (dist.samples.empty()) throw validation_error("summarize: empty distribution");
    for (double level : levels)
        if (!(level > 0.0 && level < 1.0)) throw validation_error("summarize: level must lie in (0, 1)");
    std::vector<double> sorted = dist.samples;
    std::sort(sorted.begin(), sorted.end());
    PriceSummary s;
    s.count = sorted.size();
    s.mean = shifted_mean(dist.samples);
    double ss = 0.0;
    for (double v : dist.samples) ss += (v - s.mean) * (v - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
    s.std_error = s.sd / std::sqrt(static_cast<double>(s.count));
    s.median = quantile_sorted(sorted, 0.5);
    s.lower = quantile_sorted(sorted, interval_lower_level);
    s.upper = quantile_sorted(sorted, interval_upper_level);
    s.width = s.upper - s.lower;
    for (double level : levels) s.percentiles.emplace_back(level, quantile_sorted(sorted, level));
    return s;
}

namespace detail {

inline void require_chain(const Chain& chain) {
    if (chain.samples.empty()) throw validation_error("propagation: empty chain");
}

inline TruncatedNormal up_distribution(const ThetaSample& t, double r_f) {
    return TruncatedNormal(t.u_star, std::sqrt(t.sigma2_u), 1.0 + r_f, infinity);
}

inline TruncatedNormal down_distribution(const ThetaSample& t, double r_f) {
    return TruncatedNormal(t.d_star, std::sqrt(t.sigma2_d), 0.0, 1.0 + r_f);
}

/// theta drawn uniformly from the chain, then xi | theta.
inline XiPair draw_xi(const Chain& chain, double r_f, RandomStream& rng) {
    const ThetaSample& t = chain.samples[rng.index(chain.samples.size())];
    const double u = up_distribution(t, r_f).sample(rng);
    const double d = down_distribution(t, r_f).sample(rng);
    return {u, d};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// theta method

struct ThetaMethodConfig {
    std::size_t theta_draws = 5000;
    std::size_t xi_per_theta = 100;
    unsigned workers = 1;
};

/// Each sample is E_{xi|theta}[P(xi)] estimated from `xi_per_theta` trees for
/// one theta drawn uniformly from the chain.
inline PriceDistribution theta_method(const Chain& chain, const MarketFrame& frame, const ThetaMethodConfig& config,
                                      const RandomStream& root) {
    detail::require_chain(chain);
    frame.validate();
    if (config.theta_draws == 0 || config.xi_per_theta == 0)
        throw validation_error("theta_method: draw counts must be positive");
    PriceDistribution out{std::vector<double>(config.theta_draws), Method::theta};
    parallel_for(config.theta_draws, config.workers, [&](std::size_t i) {
        RandomStream rng = root.child(i);
        const ThetaSample& t = chain.samples[rng.index(chain.samples.size())];
        const auto up = detail::up_distribution(t, frame.r_f);
        const auto down = detail::down_distribution(t, frame.r_f);
        std::vector<double> prices(config.xi_per_theta);
        for (auto& price : prices) {
            const double u = up.sample(rng);
            const double d = down.sample(rng);
            price = price_european({u, d}, frame);
        }
        out.samples[i] = shifted_mean(prices);
    });
    return out;
}

// ---------------------------------------------------------------------------
// xi method

enum class Resampling { systematic, multinomial };

struct XiMethodConfig {
    std::size_t xi_draws = 5000;
    std::size_t bins_per_axis = 100;
    /// Grid range per axis, as quantile levels of the drawn values.
    double range_low = 0.001;
    double range_high = 0.999;
    /// Price the raw draws directly instead of the binned approximation.
    bool bin_free = false;
    Resampling resampling = Resampling::systematic;
    /// Number of priced trees; 0 means xi_draws.
    std::size_t price_samples = 0;
    unsigned workers = 1;
};

/// Histogram approximation of the posterior predictive of (u, d). Only
/// occupied bins are stored, in row-major bin order.
struct XiGrid {
    std::size_t bins_per_axis = 0;
    double u_low = 0.0, u_high = 0.0;
    double d_low = 0.0, d_high = 0.0;
    std::vector<XiPair> bin_centers;
    std::vector<double> masses;
    std::vector<std::size_t> counts;
    bool degenerate = false;  // every draw identical
};

namespace detail {

struct Axis {
    double low;
    double high;
    std::size_t bins;

    double width() const noexcept { return (high - low) / static_cast<double>(bins); }

    std::size_t bin_of(double x) const noexcept {
        if (!(high > low)) return 0;
        const double k = std::floor((x - low) / width());
        if (k <= 0.0) return 0;
        return std::min(static_cast<std::size_t>(k), bins - 1);
    }

    double center(std::size_t k) const noexcept {
        if (!(high > low)) return low;
        return std::clamp(low + (static_cast<double>(k) + 0.5) * width(), low, high);
    }
};

inline Axis quantile_axis(std::vector<double> values, double lo_level, double hi_level, std::size_t bins) {
    std::sort(values.begin(), values.end());
    return {quantile_sorted(values, lo_level), quantile_sorted(values, hi_level), bins};
}

}  // namespace detail

/// Bins draws on an M x M grid spanning the configured quantile range of each
/// axis; draws outside the range fall into the edge bins.
inline XiGrid build_xi_grid(std::span<const XiPair> draws, std::size_t bins_per_axis, double range_low = 0.001,
                            double range_high = 0.999) {
    if (draws.empty()) throw validation_error("xi grid: no draws");
    if (bins_per_axis < 2) throw validation_error("xi grid: need at least two bins per axis");
    if (!(0.0 <= range_low && range_low < range_high && range_high <= 1.0))
        throw validation_error("xi grid: invalid quantile range");
    std::vector<double> us, ds;
    us.reserve(draws.size());
    ds.reserve(draws.size());
    for (const auto& xi : draws) {
        us.push_back(xi.u);
        ds.push_back(xi.d);
    }
    const bool identical =
        std::all_of(draws.begin(), draws.end(), [&](const XiPair& xi) { return xi == draws.front(); });
    const auto u_axis = detail::quantile_axis(std::move(us), range_low, range_high, bins_per_axis);
    const auto d_axis = detail::quantile_axis(std::move(ds), range_low, range_high, bins_per_axis);

    std::vector<std::size_t> flat(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i)
        flat[i] = u_axis.bin_of(draws[i].u) * bins_per_axis + d_axis.bin_of(draws[i].d);
    std::sort(flat.begin(), flat.end());

    XiGrid grid;
    grid.bins_per_axis = bins_per_axis;
    grid.u_low = u_axis.low;
    grid.u_high = u_axis.high;
    grid.d_low = d_axis.low;
    grid.d_high = d_axis.high;
    grid.degenerate = identical;
    const double total = static_cast<double>(draws.size());
    for (std::size_t i = 0; i < flat.size();) {
        std::size_t j = i;
        while (j < flat.size() && flat[j] == flat[i]) ++j;
        const std::size_t iu = flat[i] / bins_per_axis;
        const std::size_t id = flat[i] % bins_per_axis;
        grid.bin_centers.push_back(identical ? draws.front() : XiPair{u_axis.center(iu), d_axis.center(id)});
        grid.counts.push_back(j - i);
        grid.masses.push_back(static_cast<double>(j - i) / total);
        i = j;
    }
    return grid;
}

/// Bin indices for `n` draws from the grid masses. Systematic resampling
/// reproduces each bin count exactly when n equals the number of draws.
inline std::vector<std::size_t> resample_bins(const XiGrid& grid, std::size_t n, Resampling scheme, RandomStream& rng) {
    std::size_t total = 0;
    for (auto c : grid.counts) total += c;
    std::vector<std::size_t> out;
    out.reserve(n);
    if (scheme == Resampling::systematic) {
        const double offset = rng.uniform();
        const double step = static_cast<double>(total) / static_cast<double>(n);
        std::size_t bin = 0;
        std::size_t cumulative = grid.counts.empty() ? 0 : grid.counts[0];
        for (std::size_t j = 0; j < n; ++j) {
            const double position = (static_cast<double>(j) + offset) * step;
            while (position >= static_cast<double>(cumulative) && bin + 1 < grid.counts.size())
                cumulative += grid.counts[++bin];
            out.push_back(bin);
        }
        return out;
    }
    std::vector<double> cdf(grid.masses.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] = acc += grid.masses[k];
    for (std::size_t j = 0; j < n; ++j) {
        const double v = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
        out.push_back(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1));
    }
    return out;
}

struct XiMethodResult {
    XiGrid grid;
    PriceDistribution prices;
    std::vector<XiPair> draws;
};

inline XiMethodResult xi_method(const Chain& chain, const MarketFrame& frame, const XiMethodConfig& config,
                                const RandomStream& root) {
    detail::require_chain(chain);
    frame.validate();
    if (config.xi_draws == 0) throw validation_error("xi_method: xi_draws must be positive");
    XiMethodResult result;
    result.prices.method = Method::xi;
    result.draws.resize(config.xi_draws);
    parallel_for(config.xi_draws, config.workers, [&](std::size_t i) {
        RandomStream rng = root.child(i);
        result.draws[i] = detail::draw_xi(chain, frame.r_f, rng);
    });
    result.grid = build_xi_grid(result.draws, config.bins_per_axis, config.range_low, config.range_high);

    if (config.bin_free) {
        result.prices.samples.resize(result.draws.size());
        parallel_for(result.draws.size(), config.workers,
                     [&](std::size_t i) { result.prices.samples[i] = price_european(result.draws[i], frame); });
        return result;
    }
    const auto& centers = result.grid.bin_centers;
    std::vector<double> bin_prices(centers.size());
    parallel_for(centers.size(), config.workers,
                 [&](std::size_t k) { bin_prices[k] = price_european(centers[k], frame); });
    RandomStream rng = root.child(config.xi_draws);
    const std::size_t n = config.price_samples == 0 ? config.xi_draws : config.price_samples;
    const auto picks = resample_bins(result.grid, n, config.resampling, rng);
    result.prices.samples.reserve(n);
    for (auto k : picks) result.prices.samples.push_back(bin_prices[k]);
    return result;
}

// ---------------------------------------------------------------------------
// expected-xi method

struct ExpectedXiConfig {
    std::size_t theta_draws = 5000;
    unsigned workers = 1;
};

/// The xi pair priced for one theta: (E(u), E(d)) under the truncated normals.
inline XiPair expected_xi(const ThetaSample& t, double r_f) {
    const auto m = truncated_moments(t.u_star, std::sqrt(t.sigma2_u), t.d_star, std::sqrt(t.sigma2_d), r_f);
    return {m.mean_u, m.mean_d};
}

inline PriceDistribution expected_xi_method(const Chain& chain, const MarketFrame& frame,
                                            const ExpectedXiConfig& config, const RandomStream& root) {
    detail::require_chain(chain);
    frame.validate();
    if (config.theta_draws == 0) throw validation_error("expected_xi_method: theta_draws must be positive");
    PriceDistribution out{std::vector<double>(config.theta_draws), Method::expected_xi};
    parallel_for(config.theta_draws, config.workers, [&](std::size_t i) {
        RandomStream rng = root.child(i);
        const ThetaSample& t = chain.samples[rng.index(chain.samples.size())];
        out.samples[i] = price_european(expected_xi(t, frame.r_f), frame);
    });
    return out;
}

}  // namespace bayescrr
