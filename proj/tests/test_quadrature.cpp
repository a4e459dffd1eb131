#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "spdeito/counter_rng.hpp"
#include "spdeito/quadrature.hpp"

using namespace spdeito;

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
    const auto rule = gauss_legendre(8, 0.0, 2.0);
    for (int d = 0; d < 16; ++d) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
        const double exact = std::pow(2.0, d + 1) / (d + 1);
        EXPECT_NEAR(s, exact, 1e-13 * exact) << "degree " << d;
    }
}

TEST(GaussLegendre, LargeOrderIntegratesOscillatoryFunction) {
    const auto rule = gauss_legendre(512, 0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::cos(101.0 * rule.nodes[i]);
    EXPECT_NEAR(s, std::sin(101.0) / 101.0, 1e-14);
}

TEST(GaussHermite, Moments) {
    const auto& rule = gauss_hermite(20);
    // int x^{2k} e^{-x^2} dx = Gamma(k + 1/2).
    for (int k = 0; k < 10; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 2 * k);
        EXPECT_NEAR(s, std::tgamma(k + 0.5), 1e-12 * std::tgamma(k + 0.5)) << "moment " << 2 * k;
    }
}

TEST(GaussHermite, HighOrderWeightsSumToSqrtPi) {
    for (const std::size_t n : {64, 127, 128, 256, 512}) {
        const auto& rule = gauss_hermite(n);
        double s = 0.0;
        for (const double w : rule.weights) s += w;
        EXPECT_NEAR(s, std::sqrt(std::numbers::pi), 1e-13) << n;
    }
}

TEST(GradedRule, ResolvesInverseSquareRootSingularity) {
    const auto rule = graded_rule(0.7, 16, 4);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] / std::sqrt(rule.nodes[i]);
    EXPECT_NEAR(s, 2.0 * std::sqrt(0.7), 1e-13);
}

TEST(CompositeRule, MatchesSimpsonOracle) {
    const auto rule = composite_rule(0.2, 1.3, 10, 4);
    auto f = [](double x) { return std::exp(-x) * std::sin(5.0 * x); };
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]);
    EXPECT_NEAR(s, oracle::simpson(f, 0.2, 1.3, 20000), 1e-12);
}

TEST(AdaptiveGaussLegendre, HandlesKink) {
    const double v = adaptive_gauss_legendre([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-13);
    EXPECT_NEAR(v, 0.5 * (0.09 + 0.49), 1e-12);
}

TEST(CompensatedSum, RecoversCancelledLowOrderBits) {
    CompensatedSum s;
    s.add(1.0);
    const double tiny = std::ldexp(1.0, -60);
    for (int i = 0; i < 1024; ++i) s.add(tiny);
    s.add(-1.0);
    EXPECT_EQ(s.value(), std::ldexp(1.0, -50));
}

TEST(PairwiseSum, OrderDependentOnly) {
    std::vector<double> v(1001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
    const double a = pairwise_sum(v);
    EXPECT_EQ(a, pairwise_sum(v));
    double naive = 0.0;
    for (const double x : v) naive += x;
    EXPECT_NEAR(a, naive, 1e-12);
}

// Known-answer vectors of the Random123 distribution for Philox4x32-10.
TEST(Philox, KnownAnswerVectors) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}),
              (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   K{0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                   K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(GaussianStream, PureFunctionOfAddress) {
    const GaussianStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    EXPECT_EQ(a.normal(5, 11), b.normal(5, 11));
    EXPECT_NE(a.normal(5, 11), c.normal(5, 11));
    EXPECT_NE(a.normal(5, 11), d.normal(5, 11));
    EXPECT_EQ(a.normal(4, 3), a.pair(2, 3)[0]);
    EXPECT_EQ(a.normal(5, 3), a.pair(2, 3)[1]);
}

TEST(GaussianStream, StandardNormalMoments) {
    const GaussianStream g(20240917, 0);
    oracle::Moments m;
    double m4 = 0.0;
    double cross = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto p = g.pair(static_cast<std::uint32_t>(i % 64), static_cast<std::uint32_t>(i / 64));
        m.add(p[0]);
        m4 += std::pow(p[0], 4);
        cross += p[0] * p[1];
    }
    EXPECT_NEAR(m.mean, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(m.variance(), 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
    EXPECT_NEAR(cross / n, 0.0, 5.0 / std::sqrt(n));
}
