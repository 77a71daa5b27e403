#pragma once

// Cox-Ross-Rubinstein recombinant binomial tree for European payoffs.

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "bayescrr/error.hpp"

namespace bayescrr {

enum class OptionKind { european_call, european_put };

inline std::string_view to_string(OptionKind kind) noexcept {
    return kind == OptionKind::european_call ? "call" : "put";
}

/// One realized tree parameterization: gross up-move u and down-move d.
struct XiPair {
    double u;
    double d;

    bool is_arbitrage_free(double r_f) const noexcept { return d > 0.0 && d < 1.0 + r_f && 1.0 + r_f < u; }

    friend bool operator==(const XiPair&, const XiPair&) = default;
};

struct MarketFrame {
    double spot;
    double strike;
    int periods;
    double r_f;  // per tree step
    OptionKind kind = OptionKind::european_call;

    void validate() const {
        if (!(spot > 0.0) || !std::isfinite(spot)) throw validation_error("market frame: spot must be positive");
        if (!(strike > 0.0) || !std::isfinite(strike)) throw validation_error("market frame: strike must be positive");
        if (periods < 1) throw validation_error("market frame: periods must be at least 1");
        if (!(r_f > -1.0) || !std::isfinite(r_f)) throw validation_error("market frame: r_f must exceed -1");
    }
};

inline double payoff(OptionKind kind, double terminal, double strike) noexcept {
    return kind == OptionKind::european_call ? std::max(terminal - strike, 0.0) : std::max(strike - terminal, 0.0);
}

/// q = ((1+r_f) - d) / (u - d).
inline double risk_neutral_q(XiPair xi, double r_f) {
    if (!std::isfinite(xi.u) || !std::isfinite(xi.d)) throw validation_error("risk_neutral_q: non-finite move");
    if (!xi.is_arbitrage_free(r_f)) throw validation_error("risk_neutral_q: require 0 < d < 1+r_f < u");
    const double spread = xi.u - xi.d;
    if (spread <= 1e-14 * xi.u) throw numerical_error("risk_neutral_q: degenerate tree (u - d too small)");
    return ((1.0 + r_f) - xi.d) / spread;
}

namespace detail {

// S u^k d^(n-k); direct powers keep exact node values where representable.
inline double terminal_value(double spot, XiPair xi, int k, int n, double log_spot, double log_u, double log_d) {
    const double direct = spot * std::pow(xi.u, k) * std::pow(xi.d, n - k);
    if (std::isfinite(direct) && direct > 1e-300) return direct;
    return std::exp(log_spot + k * log_u + (n - k) * log_d);
}

}  // namespace detail

/// Discounted risk-neutral expectation as a closed binomial sum, O(T).
/// Node values, weights and discounting are evaluated in log space so large
/// T neither overflows u^T nor underflows the binomial weights.
inline double price_european(XiPair xi, const MarketFrame& frame) {
    frame.validate();
    const double q = risk_neutral_q(xi, frame.r_f);
    const int n = frame.periods;
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    const double log_u = std::log(xi.u);
    const double log_d = std::log(xi.d);
    const double log_spot = std::log(frame.spot);
    const double log_discount = -n * std::log1p(frame.r_f);

    // log C(n, k), advanced incrementally.
    double log_choose = 0.0;
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) log_choose += std::log(static_cast<double>(n - k + 1)) - std::log(static_cast<double>(k));
        const double terminal = detail::terminal_value(frame.spot, xi, k, n, log_spot, log_u, log_d);
        const double value = payoff(frame.kind, terminal, frame.strike);
        if (value == 0.0) continue;
        total += std::exp(log_choose + k * log_q + (n - k) * log_1mq + log_discount) * value;
    }
    return total;
}

/// Backward induction over the recombinant lattice, O(T^2). Same contract as
/// price_european; kept for payoffs that need per-node decisions.
inline double price_european_backward(XiPair xi, const MarketFrame& frame) {
    frame.validate();
    const double q = risk_neutral_q(xi, frame.r_f);
    const int n = frame.periods;
    const double discount = 1.0 / (1.0 + frame.r_f);
    const double log_u = std::log(xi.u);
    const double log_d = std::log(xi.d);
    const double log_spot = std::log(frame.spot);

    std::vector<double> values(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        values[k] = payoff(frame.kind, detail::terminal_value(frame.spot, xi, k, n, log_spot, log_u, log_d), frame.strike);
    for (int step = n; step > 0; --step)
        for (int k = 0; k < step; ++k) values[k] = discount * (q * values[k + 1] + (1.0 - q) * values[k]);
    return values[0];
}

}  // namespace bayescrr
