#pragma once

// Naive calibrations used as comparison points: sample means (SM),
// bootstrapped means (BM) and bootstrapped values (BV).

#include <cstdint>
#include <vector>

#include "bayescrr/error.hpp"
#include "bayescrr/mcmc.hpp"
#include "bayescrr/parallel.hpp"
#include "bayescrr/propagation.hpp"
#include "bayescrr/random.hpp"
#include "bayescrr/tree.hpp"

namespace bayescrr {

struct BootstrapConfig {
    std::size_t replicates = 5000;
    unsigned workers = 1;
};

/// Up and down observations of a window, split strictly around 1+r_f.
/// Ties are dropped: as a tree move they would give u = 1+r_f.
struct SplitReturns {
    std::vector<double> up;
    std::vector<double> down;

    explicit SplitReturns(const ReturnSeries& data) {
        const double gross = 1.0 + data.r_f;
        for (double x : data.values) {
            if (x > gross) up.push_back(x);
            else if (x < gross) down.push_back(x);
        }
        if (up.empty()) throw degenerate_window_error("no up moves");
        if (down.empty()) throw degenerate_window_error("no down moves");
    }
};

inline XiPair sample_means_xi(const ReturnSeries& data) {
    const SplitReturns split(data);
    return {shifted_mean(split.up), shifted_mean(split.down)};
}

/// One tree at (mean of up returns, mean of down returns).
inline double sample_means_calibration(const ReturnSeries& data, const MarketFrame& frame) {
    data.validate(infinity);
    return price_european(sample_means_xi(data), frame);
}

/// Stratified resampling: each replicate redraws the up and the down class
/// with replacement at their observed sizes and prices the pair of means.
inline PriceDistribution bootstrapped_means(const ReturnSeries& data, const MarketFrame& frame,
                                            const BootstrapConfig& config, const RandomStream& root) {
    data.validate(infinity);
    frame.validate();
    if (config.replicates == 0) throw validation_error("bootstrap: replicates must be at least 1");
    const SplitReturns split(data);
    PriceDistribution out{std::vector<double>(config.replicates), Method::bm};
    parallel_for(config.replicates, config.workers, [&](std::size_t i) {
        RandomStream rng = root.child(i);
        auto resampled_mean = [&rng](const std::vector<double>& values) {
            const double origin = values.front();
            double acc = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) acc += values[rng.index(values.size())] - origin;
            return origin + acc / static_cast<double>(values.size());
        };
        const double u = resampled_mean(split.up);
        const double d = resampled_mean(split.down);
        out.samples[i] = price_european({u, d}, frame);
    });
    return out;
}

/// Each replicate prices one observed up value against one observed down value.
inline PriceDistribution bootstrapped_values(const ReturnSeries& data, const MarketFrame& frame,
                                             const BootstrapConfig& config, const RandomStream& root) {
    data.validate(infinity);
    frame.validate();
    if (config.replicates == 0) throw validation_error("bootstrap: replicates must be at least 1");
    const SplitReturns split(data);
    PriceDistribution out{std::vector<double>(config.replicates), Method::bv};
    parallel_for(config.replicates, config.workers, [&](std::size_t i) {
        RandomStream rng = root.child(i);
        const double u = split.up[rng.index(split.up.size())];
        const double d = split.down[rng.index(split.down.size())];
        out.samples[i] = price_european({u, d}, frame);
    });
    return out;
}

}  // namespace bayescrr
