#pragma once

// Posterior sampler for the two-component truncated-normal mixture of gross
// returns: exact Beta draw for p, random-walk Metropolis for u*, d*,
// sigma_u^2 and sigma_d^2, with a pre-burn-in proposal-variance tuner.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bayescrr/error.hpp"
#include "bayescrr/random.hpp"
#include "bayescrr/stats.hpp"

namespace bayescrr {

/// Observed gross returns xi_i = 1 + R_i and the per-period risk-free rate.
/// Observations equal to 1+r_f are counted as up moves.
struct ReturnSeries {
    std::vector<double> values;
    double r_f = 0.0;

    void validate(double u_upper = 2.0) const {
        if (!(r_f > -1.0) || !std::isfinite(r_f)) throw validation_error("return series: r_f must exceed -1");
        for (double x : values) {
            if (!(x > 0.0) || !std::isfinite(x)) throw validation_error("return series: gross returns must be positive");
            if (x >= u_upper) throw validation_error("return series: gross return at or above the u* prior upper bound");
        }
    }

    std::size_t ties() const noexcept {
        std::size_t n = 0;
        for (double x : values) n += x == 1.0 + r_f;
        return n;
    }
};

/// Count, mean and centred sum of squares of one class of observations.
struct ClassSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    /// Sum of (x - location)^2 over the class.
    double squared_deviation(double location) const noexcept {
        const double shift = mean - location;
        return m2 + static_cast<double>(count) * shift * shift;
    }

    /// Unbiased sample variance; zero when fewer than two observations.
    double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

struct PartitionedReturns {
    ClassSummary up;
    ClassSummary down;
    ClassSummary all;
    double r_f = 0.0;

    explicit PartitionedReturns(const ReturnSeries& data) : r_f(data.r_f) {
        for (double x : data.values) {
            (x >= 1.0 + r_f ? up : down).add(x);
            all.add(x);
        }
    }
};

struct PriorConfig {
    double a = 1.0;
    double b = 1.0;
    double alpha_u = 2.0;
    double beta_u = 1e-4;
    double alpha_d = 2.0;
    double beta_d = 1e-4;
    double u_upper = 2.0;

    void validate(double r_f) const {
        if (!(a > 0.0 && b > 0.0 && alpha_u > 0.0 && beta_u > 0.0 && alpha_d > 0.0 && beta_d > 0.0))
            throw validation_error("prior: hyperparameters must be positive");
        if (!(u_upper > 1.0 + r_f)) throw validation_error("prior: u_upper must exceed 1+r_f");
    }

    /// a = b = 1, alpha = 2, beta = (alpha - 1) * class sample variance, so the
    /// inverse-gamma prior is centred on the empirical variance of each class.
    static PriorConfig defaults_for(const ReturnSeries& data, double u_upper = 2.0) {
        const PartitionedReturns parts(data);
        PriorConfig prior;
        prior.u_upper = u_upper;
        prior.beta_u = (prior.alpha_u - 1.0) * fallback_variance(parts.up, parts.all);
        prior.beta_d = (prior.alpha_d - 1.0) * fallback_variance(parts.down, parts.all);
        return prior;
    }

    static double fallback_variance(const ClassSummary& cls, const ClassSummary& all) noexcept {
        if (cls.variance() > 0.0) return cls.variance();
        if (all.variance() > 0.0) return all.variance();
        return 1e-6;
    }
};

/// One posterior draw of the mixture parameters.
struct ThetaSample {
    double u_star;
    double d_star;
    double sigma2_u;
    double sigma2_d;
    double p;

    bool in_support(double r_f, double u_upper) const noexcept {
        return 0.0 < d_star && d_star < 1.0 + r_f && 1.0 + r_f < u_star && u_star < u_upper && sigma2_u > 0.0 &&
               sigma2_d > 0.0 && p > 0.0 && p < 1.0;
    }

    friend bool operator==(const ThetaSample&, const ThetaSample&) = default;
};

/// Parameters updated by Metropolis steps.
enum class Param : std::size_t { u_star = 0, d_star = 1, sigma2_u = 2, sigma2_d = 3 };

inline constexpr std::array<Param, 4> metropolis_params{Param::u_star, Param::d_star, Param::sigma2_u,
                                                        Param::sigma2_d};

template <class T>
using PerParam = std::array<T, 4>;

constexpr std::size_t index_of(Param p) noexcept { return static_cast<std::size_t>(p); }

inline std::string_view to_string(Param p) noexcept {
    constexpr std::array<std::string_view, 4> names{"u_star", "d_star", "sigma2_u", "sigma2_d"};
    return names[index_of(p)];
}

inline double& value_of(ThetaSample& theta, Param p) noexcept {
    switch (p) {
        case Param::u_star: return theta.u_star;
        case Param::d_star: return theta.d_star;
        case Param::sigma2_u: return theta.sigma2_u;
        case Param::sigma2_d: return theta.sigma2_d;
    }
    return theta.u_star;
}

inline double value_of(const ThetaSample& theta, Param p) noexcept { return value_of(const_cast<ThetaSample&>(theta), p); }

constexpr bool in_up_block(Param p) noexcept { return p == Param::u_star || p == Param::sigma2_u; }

// ---------------------------------------------------------------------------
// Likelihood and block targets

/// Sum over up observations of log TN(xi | u*, sigma_u^2, 1+r_f, +inf).
inline double up_log_likelihood(const ClassSummary& up, double r_f, double u_star, double sigma2_u) {
    if (up.count == 0) return 0.0;
    const double n = static_cast<double>(up.count);
    const double sigma = std::sqrt(sigma2_u);
    return -n * (log_sqrt_2pi + 0.5 * std::log(sigma2_u)) - up.squared_deviation(u_star) / (2.0 * sigma2_u) -
           n * log_normal_sf((1.0 + r_f - u_star) / sigma);
}

/// Sum over down observations of log TN(xi | d*, sigma_d^2, 0, 1+r_f).
inline double down_log_likelihood(const ClassSummary& down, double r_f, double d_star, double sigma2_d) {
    if (down.count == 0) return 0.0;
    const double n = static_cast<double>(down.count);
    const double sigma = std::sqrt(sigma2_d);
    return -n * (log_sqrt_2pi + 0.5 * std::log(sigma2_d)) - down.squared_deviation(d_star) / (2.0 * sigma2_d) -
           n * log_interval_mass(-d_star / sigma, (1.0 + r_f - d_star) / sigma);
}

/// Log of the mixture likelihood. Returns -inf when theta leaves the
/// parameter support (0 < d* < 1+r_f < u*, positive variances, 0 <= p <= 1).
inline double log_likelihood(const ThetaSample& theta, const ReturnSeries& data, double u_upper = infinity) {
    if (data.values.empty()) return 0.0;
    ThetaSample interior = theta;
    interior.p = 0.5;
    if (!interior.in_support(data.r_f, u_upper) || !(theta.p >= 0.0 && theta.p <= 1.0)) return -infinity;
    const PartitionedReturns parts(data);
    double total = 0.0;
    if (parts.up.count > 0)
        total += static_cast<double>(parts.up.count) * std::log(theta.p) +
                 up_log_likelihood(parts.up, data.r_f, theta.u_star, theta.sigma2_u);
    if (parts.down.count > 0)
        total += static_cast<double>(parts.down.count) * std::log1p(-theta.p) +
                 down_log_likelihood(parts.down, data.r_f, theta.d_star, theta.sigma2_d);
    return total;
}

/// Unnormalized log full conditional of (u*, sigma_u^2): uniform prior on
/// (1+r_f, u_upper), inverse-gamma prior on sigma_u^2, up-class likelihood.
inline double up_block_log_target(double u_star, double sigma2_u, const PartitionedReturns& parts,
                                  const PriorConfig& prior) {
    const double r_f = parts.r_f;
    if (!(1.0 + r_f < u_star && u_star < prior.u_upper) || !(sigma2_u > 0.0)) return -infinity;
    return log_inverse_gamma_kernel(sigma2_u, prior.alpha_u, prior.beta_u) +
           up_log_likelihood(parts.up, r_f, u_star, sigma2_u);
}

inline double down_block_log_target(double d_star, double sigma2_d, const PartitionedReturns& parts,
                                    const PriorConfig& prior) {
    const double r_f = parts.r_f;
    if (!(0.0 < d_star && d_star < 1.0 + r_f) || !(sigma2_d > 0.0)) return -infinity;
    return log_inverse_gamma_kernel(sigma2_d, prior.alpha_d, prior.beta_d) +
           down_log_likelihood(parts.down, r_f, d_star, sigma2_d);
}

inline double block_log_target(Param param, const ThetaSample& theta, const PartitionedReturns& parts,
                               const PriorConfig& prior) {
    return in_up_block(param) ? up_block_log_target(theta.u_star, theta.sigma2_u, parts, prior)
                              : down_block_log_target(theta.d_star, theta.sigma2_d, parts, prior);
}

/// Metropolis acceptance probability min(1, ratio) for moving `param` to
/// `proposed` with a symmetric proposal.
inline double acceptance_probability(Param param, const ThetaSample& current, double proposed,
                                     const PartitionedReturns& parts, const PriorConfig& prior) {
    ThetaSample candidate = current;
    value_of(candidate, param) = proposed;
    const double log_new = block_log_target(param, candidate, parts, prior);
    if (log_new == -infinity) return 0.0;
    const double log_old = block_log_target(param, current, parts, prior);
    if (log_old == -infinity) return 1.0;
    return std::min(1.0, std::exp(log_new - log_old));
}

// ---------------------------------------------------------------------------
// Updates

/// Draw from the exact conditional Beta(a + #up, b + #down) of p.
inline double sample_p(const PartitionedReturns& parts, const PriorConfig& prior, RandomStream& rng) {
    return sample_beta(prior.a + static_cast<double>(parts.up.count), prior.b + static_cast<double>(parts.down.count),
                       rng);
}

inline double sample_p(const ReturnSeries& data, const PriorConfig& prior, RandomStream& rng) {
    return sample_p(PartitionedReturns(data), prior, rng);
}

struct StepResult {
    ThetaSample theta;
    bool accepted;
};

namespace detail {

// Cached log targets of the current up and down blocks.
struct BlockTargets {
    double up;
    double down;

    double& of(Param p) noexcept { return in_up_block(p) ? up : down; }
};

inline BlockTargets current_targets(const ThetaSample& theta, const PartitionedReturns& parts, const PriorConfig& prior) {
    return {up_block_log_target(theta.u_star, theta.sigma2_u, parts, prior),
            down_block_log_target(theta.d_star, theta.sigma2_d, parts, prior)};
}

// Random-walk update in place. Always consumes one normal and one uniform.
inline bool metropolis_update(Param param, ThetaSample& theta, BlockTargets& targets, const PartitionedReturns& parts,
                              const PriorConfig& prior, double proposal_variance, RandomStream& rng) {
    const double step = std::sqrt(proposal_variance) * rng.normal();
    const double log_u = std::log(rng.uniform());
    ThetaSample candidate = theta;
    value_of(candidate, param) += step;
    const double log_new = block_log_target(param, candidate, parts, prior);
    if (log_new == -infinity) return false;
    double& log_old = targets.of(param);
    if (log_u < log_new - log_old) {
        theta = candidate;
        log_old = log_new;
        return true;
    }
    return false;
}

}  // namespace detail

/// One random-walk Metropolis step on `param` with Normal(current, variance)
/// proposals; out-of-support proposals are rejected deterministically.
inline StepResult metropolis_step(Param param, const ThetaSample& current, const PartitionedReturns& parts,
                                  const PriorConfig& prior, double proposal_variance, RandomStream& rng) {
    if (!(proposal_variance > 0.0)) throw validation_error("metropolis_step: proposal variance must be positive");
    StepResult result{current, false};
    auto targets = detail::current_targets(current, parts, prior);
    result.accepted = detail::metropolis_update(param, result.theta, targets, parts, prior, proposal_variance, rng);
    return result;
}

// ---------------------------------------------------------------------------
// Pre-burn-in tuning

struct TunerConfig {
    std::size_t block_size = 100;
    std::size_t max_blocks = 50;
    /// Apply the published rule literally: high acceptance halves the variance.
    /// Off by default, since that direction moves acceptance away from the
    /// 10-50% target.
    bool literal = false;
};

struct TuningResult {
    PerParam<double> variances{};
    std::size_t blocks = 0;
    bool converged = false;
    ThetaSample state{};
    std::vector<PerParam<std::size_t>> block_acceptances;
};

/// Applies one block's adjustment. Acceptance above block/2 or below block/10
/// changes the variance by a factor of two; inside that band it is kept.
/// Returns true if any variance changed.
inline bool adjust_proposal_variances(const PerParam<std::size_t>& accepted, PerParam<double>& variances,
                                      std::size_t block_size, bool literal) {
    bool changed = false;
    for (std::size_t i = 0; i < variances.size(); ++i) {
        const double widen = literal ? 0.5 : 2.0;
        if (2 * accepted[i] > block_size) {
            variances[i] *= widen;
            changed = true;
        } else if (10 * accepted[i] < block_size) {
            variances[i] /= widen;
            changed = true;
        }
    }
    return changed;
}

/// Starting proposal variances: class sample variances for u* and d*, and 64
/// times the asymptotic variance 2 s^4 / n of a sample variance for sigma^2.
/// Truncation lets sigma^2 trade off against the location, so its posterior is
/// far wider than s^2 alone suggests; the factor puts first-block acceptance
/// near 30% on 252-day windows of daily returns.
inline PerParam<double> initial_proposal_variances(const PartitionedReturns& parts) {
    const double var_u = PriorConfig::fallback_variance(parts.up, parts.all);
    const double var_d = PriorConfig::fallback_variance(parts.down, parts.all);
    const double n_u = static_cast<double>(std::max<std::size_t>(parts.up.count, 1));
    const double n_d = static_cast<double>(std::max<std::size_t>(parts.down.count, 1));
    return {var_u, var_d, 128.0 * var_u * var_u / n_u, 128.0 * var_d * var_d / n_d};
}

namespace detail {

inline void sweep(ThetaSample& theta, BlockTargets& targets, const PartitionedReturns& parts, const PriorConfig& prior,
                  const PerParam<double>& variances, RandomStream& rng, PerParam<bool>& accepted) {
    theta.p = sample_p(parts, prior, rng);
    for (Param param : {Param::u_star, Param::sigma2_u, Param::d_star, Param::sigma2_d})
        accepted[index_of(param)] =
            metropolis_update(param, theta, targets, parts, prior, variances[index_of(param)], rng);
}

}  // namespace detail

inline TuningResult adaptive_pre_burn_in(const PartitionedReturns& parts, const PriorConfig& prior,
                                         const ThetaSample& initial, PerParam<double> variances, RandomStream& rng,
                                         const TunerConfig& config = {}) {
    if (config.block_size == 0 || config.max_blocks == 0) throw validation_error("tuner: empty block configuration");
    if (!initial.in_support(parts.r_f, prior.u_upper)) throw validation_error("tuner: initial state outside support");
    TuningResult result;
    result.state = initial;
    auto targets = detail::current_targets(initial, parts, prior);
    PerParam<bool> flags{};
    while (result.blocks < config.max_blocks) {
        PerParam<std::size_t> accepted{};
        for (std::size_t it = 0; it < config.block_size; ++it) {
            detail::sweep(result.state, targets, parts, prior, variances, rng, flags);
            for (std::size_t i = 0; i < 4; ++i) accepted[i] += flags[i];
        }
        ++result.blocks;
        result.block_acceptances.push_back(accepted);
        if (!adjust_proposal_variances(accepted, variances, config.block_size, config.literal)) {
            result.converged = true;
            break;
        }
    }
    result.variances = variances;
    return result;
}

// ---------------------------------------------------------------------------
// Full chain

struct ChainConfig {
    std::size_t iterations = 10000;
    std::size_t burn_in = 1000;
    std::size_t thin = 5;
    std::uint64_t seed = 0;
    TunerConfig tuner{};
};

struct Chain {
    std::vector<ThetaSample> samples;
    std::vector<std::size_t> kept_iterations;
    PerParam<double> proposal_variances{};
    PerParam<std::size_t> acceptance_counts{};
    /// Acceptance flag per main-chain iteration and parameter.
    std::vector<PerParam<bool>> acceptance_flags;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    TuningResult tuning{};
    double r_f = 0.0;
    double u_upper = 2.0;

    double acceptance_rate(Param p) const noexcept {
        return iterations == 0 ? 0.0
                               : static_cast<double>(acceptance_counts[index_of(p)]) / static_cast<double>(iterations);
    }
};

/// Starting state from class means and variances of the observations.
inline ThetaSample initial_theta(const PartitionedReturns& parts, const PriorConfig& prior) {
    const double gross = 1.0 + parts.r_f;
    ThetaSample theta{};
    theta.u_star = parts.up.mean;
    if (!(theta.u_star > gross)) theta.u_star = gross + 0.5 * std::sqrt(PriorConfig::fallback_variance(parts.up, parts.all));
    theta.u_star = std::min(theta.u_star, 0.5 * (gross + prior.u_upper));
    theta.d_star = parts.down.mean;
    theta.sigma2_u = PriorConfig::fallback_variance(parts.up, parts.all);
    theta.sigma2_d = PriorConfig::fallback_variance(parts.down, parts.all);
    const double n = static_cast<double>(parts.all.count);
    theta.p = (static_cast<double>(parts.up.count) + 0.5) / (n + 1.0);
    return theta;
}

inline Chain run_chain(const ReturnSeries& data, const PriorConfig& prior, const ChainConfig& config) {
    data.validate(prior.u_upper);
    prior.validate(data.r_f);
    if (config.iterations <= config.burn_in) throw validation_error("run_chain: iterations must exceed burn_in");
    if (config.thin == 0) throw validation_error("run_chain: thin must be at least 1");
    const PartitionedReturns parts(data);
    if (parts.up.count == 0) throw degenerate_window_error("no up moves");
    if (parts.down.count == 0) throw degenerate_window_error("no down moves");

    RandomStream rng(config.seed);
    Chain chain;
    chain.seed = config.seed;
    chain.r_f = data.r_f;
    chain.u_upper = prior.u_upper;
    chain.iterations = config.iterations;
    chain.tuning = adaptive_pre_burn_in(parts, prior, initial_theta(parts, prior), initial_proposal_variances(parts),
                                        rng, config.tuner);
    chain.proposal_variances = chain.tuning.variances;

    ThetaSample theta = chain.tuning.state;
    auto targets = detail::current_targets(theta, parts, prior);
    const std::size_t kept = (config.iterations - config.burn_in + config.thin - 1) / config.thin;
    chain.samples.reserve(kept);
    chain.kept_iterations.reserve(kept);
    chain.acceptance_flags.resize(config.iterations);
    for (std::size_t it = 0; it < config.iterations; ++it) {
        auto& flags = chain.acceptance_flags[it];
        detail::sweep(theta, targets, parts, prior, chain.proposal_variances, rng, flags);
        for (std::size_t i = 0; i < 4; ++i) chain.acceptance_counts[i] += flags[i];
        if (it >= config.burn_in && (it - config.burn_in) % config.thin == 0) {
            chain.samples.push_back(theta);
            chain.kept_iterations.push_back(it);
        }
    }
    return chain;
}

}  // namespace bayescrr
