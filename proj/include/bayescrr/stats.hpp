#pragma once

// Normal, truncated-normal, Beta, Gamma and Inverse-Gamma quantities used by
// the sampler and the propagation methods.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/gamma_distribution.hpp>

#include "bayescrr/error.hpp"
#include "bayescrr/random.hpp"

namespace bayescrr {

inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
inline constexpr double log_sqrt_2pi = 0.918938533204672741780329736406;
inline constexpr double sqrt_2 = 1.41421356237309504880168872421;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

inline double normal_pdf(double z) noexcept { return inv_sqrt_2pi * std::exp(-0.5 * z * z); }

inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / sqrt_2); }

/// Upper tail 1 - Phi(z), accurate in the right tail.
inline double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / sqrt_2); }

namespace detail {

inline constexpr double mills_switch = 6.0;

// (1 - Phi(c)) / phi(c) for c > mills_switch by backward evaluation of
// the Laplace continued fraction 1/(c+1/(c+2/(c+3/(c+...)))).
inline double mills_continued_fraction(double c) noexcept {
    double t = c;
    for (int k = 80; k >= 1; --k) t = c + k / t;
    return 1.0 / t;
}

}  // namespace detail

/// Mills ratio (1 - Phi(c)) / phi(c). Defined for all c; tail-stable for c > 6.
inline double mills_ratio(double c) noexcept {
    if (c == infinity) return 0.0;
    if (c > detail::mills_switch) return detail::mills_continued_fraction(c);
    return normal_sf(c) / normal_pdf(c);
}

/// Inverse Mills ratio phi(c) / (1 - Phi(c)).
inline double inverse_mills_ratio(double c) noexcept {
    if (c == -infinity) return 0.0;
    if (c > detail::mills_switch) return 1.0 / detail::mills_continued_fraction(c);
    return normal_pdf(c) / normal_sf(c);
}

/// log(1 - Phi(c)).
inline double log_normal_sf(double c) noexcept {
    if (c > detail::mills_switch) return -0.5 * c * c - log_sqrt_2pi + std::log(detail::mills_continued_fraction(c));
    return std::log(normal_sf(c));
}

namespace detail {

// For 0 <= a < b <= inf: returns R(a) - exp((a^2-b^2)/2) R(b), i.e. the
// standard-normal mass on (a, b) divided by phi(a).
inline double scaled_right_mass(double a, double b) noexcept {
    if (b == infinity) return mills_ratio(a);
    const double e = std::exp(-0.5 * (b - a) * (b + a));
    return mills_ratio(a) - e * mills_ratio(b);
}

}  // namespace detail

/// log(Phi(b) - Phi(a)) for a < b, without underflow in either tail.
inline double log_interval_mass(double a, double b) noexcept {
    if (a >= 0.0) {
        if (b == infinity) return log_normal_sf(a);
        return -0.5 * a * a - log_sqrt_2pi + std::log(detail::scaled_right_mass(a, b));
    }
    if (b <= 0.0) return log_interval_mass(-b, -a);
    return std::log(0.5 * (std::erf(b / sqrt_2) - std::erf(a / sqrt_2)));
}

/// (phi(a) - phi(b)) / (Phi(b) - Phi(a)): the standardized mean of a normal
/// truncated to (a, b).
inline double truncated_standard_mean(double a, double b) noexcept {
    if (a >= 0.0) {
        if (b == infinity) return inverse_mills_ratio(a);
        const double e = std::exp(-0.5 * (b - a) * (b + a));
        return (1.0 - e) / detail::scaled_right_mass(a, b);
    }
    if (b <= 0.0) return -truncated_standard_mean(-b, -a);
    const double mass = 0.5 * (std::erf(b / sqrt_2) - std::erf(a / sqrt_2));
    const double pa = a == -infinity ? 0.0 : normal_pdf(a);
    const double pb = b == infinity ? 0.0 : normal_pdf(b);
    return (pa - pb) / mass;
}

/// Normal(location, scale^2) restricted and renormalized to [lower, upper].
/// Immutable; safe to share across threads.
class TruncatedNormal {
public:
    TruncatedNormal(double location, double scale, double lower = -infinity, double upper = infinity)
        : location_(location), scale_(scale), lower_(lower), upper_(upper) {
        if (!std::isfinite(location)) throw validation_error("truncated normal: non-finite location");
        if (!(scale > 0.0) || !std::isfinite(scale)) throw validation_error("truncated normal: scale must be positive");
        if (!(lower < upper) || std::isnan(lower) || std::isnan(upper))
            throw validation_error("truncated normal: lower bound must be below upper bound");
        alpha_ = (lower_ - location_) / scale_;
        beta_ = (upper_ - location_) / scale_;
        log_mass_ = log_interval_mass(alpha_, beta_);
        if (!(log_mass_ > -infinity)) throw numerical_error("truncated normal: truncation mass vanishes");
    }

    double location() const noexcept { return location_; }
    double scale() const noexcept { return scale_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    /// Standardized bounds (lower - location)/scale and (upper - location)/scale.
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double log_mass() const noexcept { return log_mass_; }

    /// Density; the support is treated as closed so boundary ties keep positive density.
    double log_pdf(double x) const {
        if (!std::isfinite(x)) throw validation_error("truncated normal: non-finite argument");
        if (x < lower_ || x > upper_) return -infinity;
        const double z = (x - location_) / scale_;
        return -0.5 * z * z - log_sqrt_2pi - std::log(scale_) - log_mass_;
    }

    double pdf(double x) const { return std::exp(log_pdf(x)); }

    /// Mean, always strictly inside the support.
    double mean() const {
        if (is_point_mass()) return location_;
        const double m = location_ + scale_ * truncated_standard_mean(alpha_, beta_);
        if (!std::isfinite(m)) throw numerical_error("truncated normal: mean not representable");
        return clamp_inside(m);
    }

    /// Scale small enough that the distribution is a point mass at `location`.
    bool is_point_mass() const noexcept {
        return scale_ <= 1e-12 * std::max(1.0, std::abs(location_)) && location_ > lower_ && location_ < upper_;
    }

    double sample(RandomStream& rng) const {
        if (is_point_mass()) return location_;
        double z;
        if (alpha_ > tail_switch)
            z = sample_right_tail(alpha_, beta_, rng);
        else if (beta_ < -tail_switch)
            z = -sample_right_tail(-beta_, -alpha_, rng);
        else
            z = sample_inverse_cdf(rng);
        return clamp_inside(location_ + scale_ * z);
    }

private:
    static constexpr double tail_switch = 5.0;

    double clamp_inside(double x) const noexcept {
        if (x <= lower_) return std::nextafter(lower_, infinity);
        if (x >= upper_) return std::nextafter(upper_, -infinity);
        return x;
    }

    double sample_inverse_cdf(RandomStream& rng) const {
        const double v = rng.uniform();
        if (alpha_ >= 0.0) return right_quantile(alpha_, beta_, v);
        if (beta_ <= 0.0) return -right_quantile(-beta_, -alpha_, v);
        const double lo = normal_cdf(alpha_);
        const double hi = normal_cdf(beta_);
        const double u = lo + (hi - lo) * v;
        if (u < 0.5) return -sqrt_2 * boost::math::erfc_inv(2.0 * u);
        // Same point expressed through upper-tail probabilities.
        const double q_lo = normal_sf(beta_);
        const double q_hi = normal_sf(alpha_);
        return sqrt_2 * boost::math::erfc_inv(2.0 * (q_lo + (q_hi - q_lo) * (1.0 - v)));
    }

    // Inverse CDF on (a, b) with 0 <= a, worked in upper-tail probabilities.
    static double right_quantile(double a, double b, double v) {
        const double q_a = normal_sf(a);
        const double q_b = normal_sf(b);
        const double w = q_b + (q_a - q_b) * (1.0 - v);
        return sqrt_2 * boost::math::erfc_inv(2.0 * w);
    }

    // Robert (1995): exponential proposal with optimal rate for one-sided
    // tails, uniform rejection when the interval is short relative to 1/a.
    static double sample_right_tail(double a, double b, RandomStream& rng) {
        if (std::isfinite(b) && a * (b - a) < 1.0) {
            for (;;) {
                const double z = a + (b - a) * rng.uniform();
                if (rng.uniform() <= std::exp(0.5 * (a - z) * (a + z))) return z;
            }
        }
        const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
        for (;;) {
            const double z = a + rng.exponential(rate);
            if (z >= b) continue;
            const double dz = z - rate;
            if (rng.uniform() <= std::exp(-0.5 * dz * dz)) return z;
        }
    }

    double location_;
    double scale_;
    double lower_;
    double upper_;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    double log_mass_ = 0.0;
};

inline double truncnorm_pdf(double x, const TruncatedNormal& dist) { return dist.pdf(x); }

inline double truncnorm_sample(const TruncatedNormal& dist, RandomStream& rng) { return dist.sample(rng); }

/// E(u) for u ~ TN(u*, sigma_u^2, 1+r_f, +inf).
inline double truncnorm_mean_u(double u_star, double sigma_u, double r_f) {
    if (!(sigma_u > 0.0)) throw validation_error("truncnorm_mean_u: sigma_u must be positive");
    return TruncatedNormal(u_star, sigma_u, 1.0 + r_f, infinity).mean();
}

/// E(d) for d ~ TN(d*, sigma_d^2, 0, 1+r_f).
inline double truncnorm_mean_d(double d_star, double sigma_d, double r_f) {
    if (!(sigma_d > 0.0)) throw validation_error("truncnorm_mean_d: sigma_d must be positive");
    return TruncatedNormal(d_star, sigma_d, 0.0, 1.0 + r_f).mean();
}

struct TruncatedMoments {
    double c0;
    double a0;
    double b0;
    double mean_u;
    double mean_d;
};

inline TruncatedMoments truncated_moments(double u_star, double sigma_u, double d_star, double sigma_d, double r_f) {
    return TruncatedMoments{
        .c0 = (1.0 + r_f - u_star) / sigma_u,
        .a0 = (0.0 - d_star) / sigma_d,
        .b0 = (1.0 + r_f - d_star) / sigma_d,
        .mean_u = truncnorm_mean_u(u_star, sigma_u, r_f),
        .mean_d = truncnorm_mean_d(d_star, sigma_d, r_f),
    };
}

inline double sample_gamma(double shape, double rate, RandomStream& rng) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw validation_error("gamma: shape and rate must be positive");
    return boost::random::gamma_distribution<double>(shape, 1.0 / rate)(rng.engine());
}

inline double sample_beta(double a, double b, RandomStream& rng) {
    if (!(a > 0.0) || !(b > 0.0)) throw validation_error("beta: parameters must be positive");
    const double x = sample_gamma(a, 1.0, rng);
    const double y = sample_gamma(b, 1.0, rng);
    return x / (x + y);
}

/// InverseGamma(shape, scale): density proportional to x^(-shape-1) exp(-scale/x).
inline double sample_inverse_gamma(double shape, double scale, RandomStream& rng) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw validation_error("inverse gamma: parameters must be positive");
    return 1.0 / sample_gamma(shape, scale, rng);
}

inline double log_inverse_gamma_kernel(double x, double shape, double scale) noexcept {
    if (!(x > 0.0)) return -infinity;
    return -(shape + 1.0) * std::log(x) - scale / x;
}

}  // namespace bayescrr
