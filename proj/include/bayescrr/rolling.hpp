#pragma once

// Rolling-window experiment: for each evaluation date before maturity,
// calibrate on the trailing window of returns and price with every selected
// method, one tree step per business day to maturity.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayescrr/baselines.hpp"
#include "bayescrr/error.hpp"
#include "bayescrr/mcmc.hpp"
#include "bayescrr/parallel.hpp"
#include "bayescrr/propagation.hpp"
#include "bayescrr/random.hpp"
#include "bayescrr/series.hpp"
#include "bayescrr/tree.hpp"

namespace bayescrr {

struct RunConfig {
    std::size_t window = 252;
    double strike = 0.0;
    Date maturity{};
    std::optional<Date> first_date;  // earliest evaluation date
    std::vector<Method> methods{all_methods.begin(), all_methods.end()};
    OptionKind kind = OptionKind::european_call;
    double annual_rate = 0.0;  // used when the series has no rate value
    DayBasis basis = DayBasis::business_252;
    double u_upper = 2.0;
    std::optional<PriorConfig> prior;  // default: PriorConfig::defaults_for(window)
    ChainConfig mcmc{};                // seed is replaced per date
    ThetaMethodConfig theta{};
    XiMethodConfig xi{};
    ExpectedXiConfig expected_xi{};
    BootstrapConfig bootstrap{};
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool keep_samples = false;

    void validate() const {
        if (window < 2) throw validation_error("run config: window must be at least 2");
        if (!(strike > 0.0)) throw validation_error("run config: strike must be positive");
    }

    bool needs_chain() const {
        for (Method m : methods)
            if (m == Method::theta || m == Method::xi || m == Method::expected_xi) return true;
        return false;
    }
};

struct MethodEntry {
    Method method;
    PriceSummary summary;
    std::optional<double> premium_mean;   // market - posterior mean
    std::optional<double> premium_upper;  // market - 99.5% percentile
    std::vector<double> samples;          // kept only on request
};

struct RollingEntry {
    Date date;
    int periods = 0;
    double spot = 0.0;
    double r_f = 0.0;
    std::optional<double> market;
    bool gap = false;
    std::string gap_reason;
    std::vector<MethodEntry> methods;
};

struct RollingReport {
    std::vector<Method> methods;
    std::vector<RollingEntry> entries;
    std::vector<std::string> warnings;
};

/// Per-date seed; independent of evaluation order and worker count.
inline std::uint64_t date_seed(std::uint64_t seed, Date date) noexcept {
    return combine_seed(seed, static_cast<std::uint64_t>(date.serial()));
}

inline std::uint64_t method_seed(std::uint64_t date_seed_value, Method m) noexcept {
    return combine_seed(date_seed_value, 1 + static_cast<std::uint64_t>(m));
}

/// Evaluates one date given its return window; throws on degenerate windows.
inline std::vector<MethodEntry> evaluate_window(const ReturnSeries& returns, const MarketFrame& frame,
                                                const RunConfig& config, std::uint64_t seed,
                                                std::optional<double> market) {
    std::optional<Chain> chain;
    if (config.needs_chain()) {
        const PriorConfig prior = config.prior.value_or(PriorConfig::defaults_for(returns, config.u_upper));
        ChainConfig mcmc = config.mcmc;
        mcmc.seed = combine_seed(seed, 0);
        chain = run_chain(returns, prior, mcmc);
    }
    std::vector<MethodEntry> out;
    for (Method m : config.methods) {
        const RandomStream root(method_seed(seed, m));
        PriceDistribution dist;
        switch (m) {
            case Method::theta: dist = theta_method(*chain, frame, config.theta, root); break;
            case Method::xi: dist = xi_method(*chain, frame, config.xi, root).prices; break;
            case Method::expected_xi: dist = expected_xi_method(*chain, frame, config.expected_xi, root); break;
            case Method::sm: dist = {{sample_means_calibration(returns, frame)}, Method::sm}; break;
            case Method::bm: dist = bootstrapped_means(returns, frame, config.bootstrap, root); break;
            case Method::bv: dist = bootstrapped_values(returns, frame, config.bootstrap, root); break;
        }
        MethodEntry entry{m, summarize(dist), std::nullopt, std::nullopt, {}};
        if (market) {
            entry.premium_mean = *market - entry.summary.mean;
            entry.premium_upper = *market - entry.summary.upper;
        }
        if (config.keep_samples) entry.samples = std::move(dist.samples);
        out.push_back(std::move(entry));
    }
    return out;
}

inline RollingReport rolling_run(const PriceSeriesFile& series, const RunConfig& config) {
    config.validate();
    if (series.size() < config.window + 1)
        throw validation_error("rolling run: series shorter than window + 1 closes");

    std::vector<std::size_t> eval;
    for (std::size_t t = config.window; t < series.size(); ++t) {
        if (!(series.dates[t] < config.maturity)) break;
        if (config.first_date && series.dates[t] < *config.first_date) continue;
        eval.push_back(t);
    }
    if (eval.empty()) throw validation_error("rolling run: no evaluation date before maturity");

    RollingReport report;
    report.methods = config.methods;
    report.entries.resize(eval.size());
    // Inner Monte Carlo runs serially; the pool spreads dates instead.
    RunConfig inner = config;
    inner.theta.workers = inner.xi.workers = inner.expected_xi.workers = inner.bootstrap.workers = 1;

    std::vector<std::size_t> ties(eval.size(), 0);
    parallel_for(eval.size(), config.workers, [&](std::size_t j) {
        const std::size_t t = eval[j];
        RollingEntry& entry = report.entries[j];
        entry.date = series.dates[t];
        entry.spot = series.closes[t];
        entry.market = series.market_option_price[t];
        entry.periods = business_days_between(entry.date, config.maturity);
        const double annual = series.rate[t].value_or(config.annual_rate);
        entry.r_f = per_period_rate(annual, config.basis);

        ReturnSeries returns;
        returns.r_f = entry.r_f;
        for (std::size_t i = t + 1 - config.window; i <= t; ++i)
            returns.values.push_back(series.closes[i] / series.closes[i - 1]);
        ties[j] = returns.ties();

        const MarketFrame frame{entry.spot, config.strike, entry.periods, entry.r_f, config.kind};
        try {
            entry.methods = evaluate_window(returns, frame, inner, date_seed(config.seed, entry.date), entry.market);
        } catch (const degenerate_window_error& e) {
            entry.gap = true;
            entry.gap_reason = e.what();
        } catch (const numerical_error& e) {
            entry.gap = true;
            entry.gap_reason = e.what();
        }
    });
    for (std::size_t j = 0; j < eval.size(); ++j)
        if (ties[j] > 0)
            report.warnings.push_back(report.entries[j].date.str() + ": " + std::to_string(ties[j]) +
                                      " return(s) equal to 1+r_f counted as up moves");
    return report;
}

}  // namespace bayescrr
