#pragma once

// Expected-utility selection of a quoted price under parameter uncertainty.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bayescrr/error.hpp"
#include "bayescrr/stats.hpp"

namespace bayescrr {

enum class UtilityKind { quadratic, zero_one, volatility_threshold };

inline UtilityKind utility_kind_from_string(std::string_view name) {
    if (name == "quadratic") return UtilityKind::quadratic;
    if (name == "zero_one") return UtilityKind::zero_one;
    if (name == "volatility_threshold") return UtilityKind::volatility_threshold;
    throw validation_error("unknown utility kind: " + std::string(name));
}

/// U = p * U_S + (1 - p) * U_B with p the probability of selling. The seller
/// and buyer utilities coincide for the kinds implemented here.
struct UtilitySpec {
    UtilityKind kind = UtilityKind::quadratic;
    std::optional<double> threshold;  // required iff kind == volatility_threshold
    double sell_probability = 0.5;
    double zero_one_band = 1e-3;  // |quote - P| within the band counts as a hit
    /// Affine rescaling scale * U + offset; leaves the optimal quote unchanged.
    double scale = 1.0;
    double offset = 0.0;

    void validate() const {
        if (!(sell_probability >= 0.0 && sell_probability <= 1.0))
            throw validation_error("utility: sell probability must lie in [0, 1]");
        if ((kind == UtilityKind::volatility_threshold) != threshold.has_value())
            throw validation_error("utility: threshold is required exactly for volatility_threshold");
        if (threshold && !(*threshold >= 0.0)) throw validation_error("utility: threshold must be non-negative");
        if (!(zero_one_band > 0.0)) throw validation_error("utility: zero-one band must be positive");
        if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(offset))
            throw validation_error("utility: scale must be positive and offset finite");
    }
};

/// A pricing map theta -> P(theta) together with a discrete prior over theta.
/// Weights come either from a density on a grid (trapezoid rule) or from
/// equally weighted samples such as a posterior chain column.
class ScalarPriceModel {
public:
    using PriceFn = std::function<double(double)>;

    static ScalarPriceModel from_density_grid(PriceFn price_fn, const std::function<double(double)>& density, double lo,
                                              double hi, std::size_t points) {
        if (points < 2 || !(hi > lo)) throw validation_error("price model: invalid prior grid");
        std::vector<double> nodes(points), weights(points);
        const double h = (hi - lo) / static_cast<double>(points - 1);
        double total = 0.0;
        for (std::size_t i = 0; i < points; ++i) {
            nodes[i] = lo + h * static_cast<double>(i);
            const double w = (i == 0 || i + 1 == points) ? 0.5 * h : h;
            weights[i] = w * density(nodes[i]);
            if (!(weights[i] >= 0.0)) throw validation_error("price model: density must be non-negative");
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-6) throw validation_error("price model: prior does not integrate to 1 on its grid");
        return ScalarPriceModel(std::move(price_fn), std::move(nodes), std::move(weights));
    }

    static ScalarPriceModel from_samples(PriceFn price_fn, std::vector<double> samples) {
        if (samples.empty()) throw validation_error("price model: empty sample prior");
        std::vector<double> weights(samples.size(), 1.0 / static_cast<double>(samples.size()));
        return ScalarPriceModel(std::move(price_fn), std::move(samples), std::move(weights));
    }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> prices() const noexcept { return prices_; }
    double price(double theta) const { return price_fn_(theta); }

    /// Prior mean of P(theta).
    double price_mean() const noexcept {
        double m = 0.0, w = 0.0;
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            m += weights_[i] * prices_[i];
            w += weights_[i];
        }
        return m / w;
    }

    double price_sd() const noexcept {
        const double m = price_mean();
        double v = 0.0, w = 0.0;
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            v += weights_[i] * (prices_[i] - m) * (prices_[i] - m);
            w += weights_[i];
        }
        return std::sqrt(v / w);
    }

private:
    ScalarPriceModel(PriceFn price_fn, std::vector<double> nodes, std::vector<double> weights)
        : price_fn_(std::move(price_fn)), nodes_(std::move(nodes)), weights_(std::move(weights)) {
        prices_.reserve(nodes_.size());
        for (double t : nodes_) {
            const double p = price_fn_(t);
            if (!std::isfinite(p)) throw validation_error("price model: price function not finite on the grid");
            prices_.push_back(p);
        }
    }

    PriceFn price_fn_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> prices_;
};

namespace detail {

inline double base_utility(UtilityKind kind, double quote, double price, double band) noexcept {
    if (kind == UtilityKind::zero_one) return std::abs(quote - price) <= band ? 1.0 : 0.0;
    return -(quote - price) * (quote - price);
}

}  // namespace detail

/// E_prior[U(quote, P(theta))]. The volatility-threshold kind declines to
/// make a market (utility 0) when sd(P(theta)) exceeds the threshold and is
/// quadratic otherwise.
inline double expected_utility(double quote, const ScalarPriceModel& model, const UtilitySpec& util) {
    util.validate();
    if (!std::isfinite(quote)) throw validation_error("expected_utility: quote must be finite");
    UtilityKind kind = util.kind;
    if (kind == UtilityKind::volatility_threshold) {
        if (model.price_sd() > *util.threshold) return 0.0;
        kind = UtilityKind::quadratic;
    }
    const auto prices = model.prices();
    const auto weights = model.weights();
    const double p = util.sell_probability;
    double total = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const double u = detail::base_utility(kind, quote, prices[i], util.zero_one_band);
        total += weights[i] * (p * u + (1.0 - p) * u);
    }
    return util.scale * total + util.offset;
}

struct QuoteDecision {
    double quote = 0.0;
    double utility = 0.0;
    std::vector<std::pair<double, double>> curve;  // (quote, expected utility)
};

/// Grid argmax of expected utility; the first maximizer wins ties.
inline QuoteDecision optimal_quote(const ScalarPriceModel& model, const UtilitySpec& util,
                                   std::span<const double> grid) {
    if (grid.empty()) throw validation_error("optimal_quote: empty search grid");
    QuoteDecision out;
    out.curve.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double eu = expected_utility(grid[i], model, util);
        out.curve.emplace_back(grid[i], eu);
        if (i == 0 || eu > out.utility) {
            out.quote = grid[i];
            out.utility = eu;
        }
    }
    return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw validation_error("linspace: need at least two points");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

inline double gamma_pdf(double x, double shape, double rate) noexcept {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return shape == 1.0 ? rate : (shape < 1.0 ? infinity : 0.0);
    return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape));
}

/// At-the-money unit call with one period, zero rate and volatility theta
/// under Black-Scholes: P(theta) = Phi(theta/2) - Phi(-theta/2).
inline double atm_unit_call(double theta) noexcept { return normal_cdf(0.5 * theta) - normal_cdf(-0.5 * theta); }

}  // namespace bayescrr
