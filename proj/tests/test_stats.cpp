#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <gtest/gtest.h>

#include "bayescrr/stats.hpp"
#include "oracles.hpp"

using namespace bayescrr;

namespace {

struct MeanVar {
    double mean, var, se_mean, se_var;
};

MeanVar sample_moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    return {m, m2, std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

std::vector<double> draws(const TruncatedNormal& tn, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = tn.sample(rng);
    return out;
}

}  // namespace

TEST(NormalFunctions, CdfAtZeroIsHalf) { EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5); }

TEST(NormalFunctions, MillsRatioMatchesQuadratureAcrossSwitch) {
    for (double c : {-3.0, 0.0, 2.0, 5.9, 6.0, 6.1, 8.0, 12.0, 30.0}) {
        const auto m = oracle::std_trunc_moments(c, oracle::inf);
        EXPECT_NEAR(inverse_mills_ratio(c), m.mean, 1e-11 * std::max(1.0, m.mean)) << c;
    }
}

TEST(NormalFunctions, LogIntervalMassInTails) {
    for (auto [a, b] : std::vector<std::pair<double, double>>{{-1, 1}, {8, 9}, {-12, -10}, {20, oracle::inf}, {-oracle::inf, -25}}) {
        const auto m = oracle::std_trunc_moments(a, b);
        EXPECT_NEAR(log_interval_mass(a, b), std::log(m.mass), 1e-10) << a << "," << b;
    }
}

TEST(TruncatedNormalPdf, ZeroBelowLowerBound) {
    const TruncatedNormal tn(1.0, 0.01, 1.004, infinity);
    EXPECT_EQ(truncnorm_pdf(1.0, tn), 0.0);
}

TEST(TruncatedNormalPdf, UntruncatedStandardNormalAtZero) {
    EXPECT_NEAR(truncnorm_pdf(0.0, TruncatedNormal(0.0, 1.0)), 0.39894, 1e-5);
}

TEST(TruncatedNormalPdf, MatchesQuadratureNormalizer) {
    const TruncatedNormal tn(1.0, 0.01, 1.004, infinity);
    const double mass = oracle::integrate([](double x) { return oracle::phi((x - 1.0) / 0.01) / 0.01; }, 1.004,
                                          oracle::inf);
    const double expected = oracle::phi(1.0) / 0.01 / mass;
    EXPECT_NEAR(truncnorm_pdf(1.01, tn), expected, 1e-10 * expected);
}

TEST(TruncatedNormalPdf, Errors) {
    const TruncatedNormal tn(0.0, 1.0, 0.0, 1.0);
    EXPECT_THROW(tn.pdf(std::nan("")), validation_error);
    EXPECT_THROW(tn.pdf(infinity), validation_error);
    EXPECT_THROW(TruncatedNormal(0.0, 0.0), validation_error);
    EXPECT_THROW(TruncatedNormal(0.0, -1.0), validation_error);
    EXPECT_THROW(TruncatedNormal(0.0, 1.0, 1.0, 1.0), validation_error);
}

TEST(TruncatedNormalPdf, IntegratesToOneOverSupport) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> loc(-3.0, 3.0), scale(0.05, 3.0), z(-7.0, 7.0), width(0.2, 5.0);
    for (int i = 0; i < 60; ++i) {
        const double l = loc(gen), s = scale(gen);
        const double lower = i % 3 == 0 ? -infinity : l + s * z(gen);
        const double upper = i % 3 == 1 ? infinity : (std::isfinite(lower) ? lower : l) + s * width(gen);
        const TruncatedNormal tn(l, s, lower, upper);
        // Integrate in the standardized variable so the integrand is O(1).
        const double a = std::max(tn.alpha(), -40.0), b = std::min(tn.beta(), 40.0);
        const double total = oracle::integrate([&](double zz) { return tn.pdf(l + s * zz) * s; }, a, b, 1e-12);
        EXPECT_NEAR(total, 1.0, 1e-6) << l << " " << s << " " << lower << " " << upper;
    }
}

TEST(TruncatedNormalSample, PointMassReturnsLocation) {
    const TruncatedNormal tn(1.002, 1e-15, 0.0, 1.004);
    RandomStream rng(1);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(tn.sample(rng), 1.002);
}

TEST(TruncatedNormalSample, HalfNormalMean) {
    const auto x = draws(TruncatedNormal(0.0, 1.0, 0.0, infinity), 100000, 3);
    const auto m = sample_moments(x);
    EXPECT_NEAR(m.mean, std::sqrt(2.0 / std::numbers::pi), 3.0 * m.se_mean);
}

TEST(TruncatedNormalSample, DownClassMeanAndVarianceMatchClosedFormAndQuadrature) {
    const TruncatedNormal tn(1.004, 0.008, 0.0, 1.004);
    const auto m = sample_moments(draws(tn, 100000, 5));
    EXPECT_NEAR(m.mean, truncnorm_mean_d(1.004, 0.008, 0.004), 3.0 * m.se_mean);
    const auto [qmean, qvar] = oracle::trunc_mean_var(1.004, 0.008, 0.0, 1.004);
    EXPECT_NEAR(m.mean, qmean, 3.0 * m.se_mean);
    EXPECT_NEAR(m.var, qvar, 3.0 * m.se_var);
}

TEST(TruncatedNormalSample, MomentsConvergeInAllSamplerRegimes) {
    // Inverse CDF (two-sided and one-sided), exponential tail rejection and
    // uniform rejection on a short far-tail interval.
    const std::vector<TruncatedNormal> cases{
        TruncatedNormal(0.0, 1.0, -0.5, 2.0),  TruncatedNormal(0.0, 1.0, 1.5, infinity),
        TruncatedNormal(0.0, 1.0, -infinity, -3.0), TruncatedNormal(0.0, 1.0, 6.5, infinity),
        TruncatedNormal(0.0, 1.0, 7.0, 7.05),  TruncatedNormal(2.0, 0.5, -infinity, -1.0),
        TruncatedNormal(1.01, 0.006, 1.0002, infinity)};
    std::uint64_t seed = 100;
    for (const auto& tn : cases) {
        const auto x = draws(tn, 100000, ++seed);
        for (double v : x) ASSERT_TRUE(v > tn.lower() && v < tn.upper());
        const auto m = sample_moments(x);
        const auto [qmean, qvar] = oracle::trunc_mean_var(tn.location(), tn.scale(), tn.lower(), tn.upper());
        EXPECT_NEAR(m.mean, qmean, 3.0 * m.se_mean) << tn.lower() << " " << tn.upper();
        EXPECT_NEAR(m.var, qvar, 3.0 * m.se_var) << tn.lower() << " " << tn.upper();
    }
}

TEST(TruncatedNormalSample, BitReproducible) {
    const TruncatedNormal tn(0.0, 1.0, 6.0, infinity);
    EXPECT_EQ(draws(tn, 1000, 42), draws(tn, 1000, 42));
    EXPECT_NE(draws(tn, 1000, 42), draws(tn, 1000, 43));
}

TEST(TruncnormMeanU, TruncationAtLocationGivesHalfNormal) {
    const double r_f = 0.003;
    EXPECT_NEAR(truncnorm_mean_u(1.0 + r_f, 1.0, r_f), 1.0 + r_f + 0.7978845608, 1e-9);
}

TEST(TruncnormMeanU, FarAboveTruncationIsLocation) {
    EXPECT_NEAR(truncnorm_mean_u(1.5, 0.01, 0.0), 1.5, 1e-15);
}

TEST(TruncnormMeanU, MatchesQuadrature) {
    const double expected = oracle::integrate([](double x) { return x * oracle::trunc_pdf(x, 1.0, 0.02, 1.004, oracle::inf); },
                                              1.004, oracle::inf);
    EXPECT_NEAR(truncnorm_mean_u(1.0, 0.02, 0.004), expected, 1e-10);
    EXPECT_GT(truncnorm_mean_u(1.0, 0.02, 0.004), 1.004);
}

TEST(TruncnormMeanU, MonotoneInLocationAndScale) {
    const double r_f = 0.001;
    double prev = 0.0;
    for (double u = 0.95; u < 1.05; u += 0.001) {
        const double m = truncnorm_mean_u(u, 0.01, r_f);
        EXPECT_GT(m, prev);
        prev = m;
    }
    prev = 0.0;
    for (double s = 0.001; s < 0.1; s *= 1.1) {
        const double m = truncnorm_mean_u(1.0, s, r_f);
        EXPECT_GT(m, prev);
        prev = m;
    }
}

TEST(TruncnormMeanU, FarTailStaysAboveBound) {
    // c0 = 40: naive phi/(1-Phi) is 0/0.
    const double m = truncnorm_mean_u(1.0 - 0.4, 0.01, 0.0);
    EXPECT_TRUE(std::isfinite(m));
    EXPECT_GT(m, 1.0);
    EXPECT_NEAR(m, 1.0 + 0.01 / 40.0, 1e-5);
}

TEST(TruncnormMeanD, SymmetricBoundsGiveLocation) {
    const double r_f = 0.004;
    EXPECT_NEAR(truncnorm_mean_d((1.0 + r_f) / 2.0, 0.3, r_f), (1.0 + r_f) / 2.0, 1e-15);
}

TEST(TruncnormMeanD, DegenerateScaleGivesLocation) {
    EXPECT_EQ(truncnorm_mean_d(0.99, 1e-14, 0.004), 0.99);
}

TEST(TruncnormMeanD, MatchesQuadrature) {
    const double expected =
        oracle::integrate([](double x) { return x * oracle::trunc_pdf(x, 0.99, 0.015, 0.0, 1.004); }, 0.0, 1.004);
    const double m = truncnorm_mean_d(0.99, 0.015, 0.004);
    EXPECT_NEAR(m, expected, 1e-10);
    EXPECT_GT(m, 0.0);
    EXPECT_LT(m, 1.004);
}

TEST(TruncnormMeanD, VanishingMassIsNumericalError) {
    EXPECT_THROW(truncnorm_mean_d(2.0, 1e-160, 0.0), numerical_error);
}

TEST(TruncnormMeans, ScaleMustBePositive) {
    EXPECT_THROW(truncnorm_mean_u(1.0, 0.0, 0.0), validation_error);
    EXPECT_THROW(truncnorm_mean_d(1.0, -1.0, 0.0), validation_error);
}

TEST(TruncatedMoments, StandardizedBoundsAndOrdering) {
    const auto m = truncated_moments(1.01, 0.02, 0.99, 0.015, 0.002);
    EXPECT_DOUBLE_EQ(m.c0, (1.002 - 1.01) / 0.02);
    EXPECT_DOUBLE_EQ(m.a0, -0.99 / 0.015);
    EXPECT_DOUBLE_EQ(m.b0, (1.002 - 0.99) / 0.015);
    EXPECT_GT(m.mean_u, 1.002);
    EXPECT_GT(m.mean_d, 0.0);
    EXPECT_LT(m.mean_d, 1.002);
}

TEST(Samplers, BetaOneOneIsUniformByKs) {
    RandomStream rng(17);
    std::vector<double> x(10000);
    for (auto& v : x) v = sample_beta(1.0, 1.0, rng);
    EXPECT_LT(oracle::ks_statistic(x, [](double t) { return t; }), oracle::ks_critical_1pct(x.size()));
}

TEST(Samplers, BetaMatchesCdfByKs) {
    RandomStream rng(19);
    std::vector<double> x(10000);
    for (auto& v : x) v = sample_beta(2.5, 7.0, rng);
    const boost::math::beta_distribution<double> beta(2.5, 7.0);
    EXPECT_LT(oracle::ks_statistic(x, [&](double t) { return boost::math::cdf(beta, t); }),
              oracle::ks_critical_1pct(x.size()));
}

TEST(Samplers, InverseGammaMean) {
    RandomStream rng(23);
    std::vector<double> x(100000);
    for (auto& v : x) v = sample_inverse_gamma(2.0, 1.0, rng);
    const auto m = sample_moments(x);
    EXPECT_NEAR(m.mean, 1.0, 3.0 * m.se_mean);
    // The variance of IG(2, 1) is infinite, so also check the whole law.
    const boost::math::inverse_gamma_distribution<double> ig(2.0, 1.0);
    std::vector<double> head(x.begin(), x.begin() + 10000);
    EXPECT_LT(oracle::ks_statistic(head, [&](double t) { return boost::math::cdf(ig, t); }),
              oracle::ks_critical_1pct(head.size()));
}

TEST(Samplers, GammaMatchesCdfByKs) {
    RandomStream rng(29);
    std::vector<double> x(10000);
    for (auto& v : x) v = sample_gamma(0.7, 3.0, rng);
    const boost::math::gamma_distribution<double> g(0.7, 1.0 / 3.0);
    EXPECT_LT(oracle::ks_statistic(x, [&](double t) { return boost::math::cdf(g, t); }),
              oracle::ks_critical_1pct(x.size()));
}

TEST(Samplers, InvalidParameters) {
    RandomStream rng(1);
    EXPECT_THROW(sample_beta(0.0, 1.0, rng), validation_error);
    EXPECT_THROW(sample_gamma(1.0, -1.0, rng), validation_error);
    EXPECT_THROW(sample_inverse_gamma(-2.0, 1.0, rng), validation_error);
}

TEST(Random, ChildStreamsAreDistinctAndReproducible) {
    const RandomStream root(5);
    RandomStream a = root.child(0), b = root.child(1), a2 = root.child(0);
    const double x = a.uniform();
    EXPECT_EQ(x, a2.uniform());
    EXPECT_NE(x, b.uniform());
}

TEST(Random, UniformIsOpenInterval) {
    RandomStream rng(0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}
