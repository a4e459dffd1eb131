#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spdeito/errors.hpp"
#include "spdeito/gaussian_semigroup.hpp"

using namespace spdeito;

TEST(Registry, JetsMatchFiniteDifferences) {
    const double h = 1e-5;
    for (const auto& name : observable_names()) {
        const auto obs = registry(name);
        for (const double u : {-1.3, 0.0, 0.4, 2.1}) {
            EXPECT_NEAR(obs.phi1(u), (obs.phi(u + h) - obs.phi(u - h)) / (2 * h), 1e-8) << name;
            EXPECT_NEAR(obs.phi2(u), (obs.phi1(u + h) - obs.phi1(u - h)) / (2 * h), 1e-8) << name;
        }
    }
    EXPECT_THROW(registry("sinh"), UnknownNameError);
    EXPECT_TRUE(registry("tanh").bounded);
    EXPECT_FALSE(registry("quadratic").bounded);
}

TEST(Logistic, StableForLargeArguments) {
    const auto obs = registry("logistic");
    EXPECT_EQ(obs.phi(-800.0), 0.0);
    EXPECT_EQ(obs.phi(800.0), 1.0);
    EXPECT_FALSE(std::isnan(obs.phi1(-800.0)));
}

TEST(HeatSemigroup, ClosedForms) {
    const HeatSemigroup p(64);
    const auto quad = registry("quadratic");
    const auto cosine = registry("cosine");
    for (const double v : {0.0, 0.1, 2.0}) {
        for (const double z : {-0.7, 0.3}) {
            EXPECT_NEAR(p.apply(quad, 0, v, z), z * z + v, 1e-13);
            EXPECT_NEAR(p.apply(quad, 1, v, z), 2.0 * z, 1e-13);
            EXPECT_NEAR(p.apply(cosine, 0, v, z), std::cos(z) * std::exp(-0.5 * v), 1e-14);
            EXPECT_NEAR(p.apply(cosine, 1, v, z), -std::sin(z) * std::exp(-0.5 * v), 1e-14);
        }
    }
}

TEST(HeatSemigroup, TanhAgainstTrapezoidAndFrozenValues) {
    const HeatSemigroup p(64);
    const auto obs = registry("tanh");
    const Jet j = p.apply_jet(obs, 0.3, 0.4);
    EXPECT_NEAR(j[0], oracle::gaussian_mean([](double u) { return std::tanh(u); }, 0.4, 0.3), 1e-12);
    // 40-digit quadrature.
    EXPECT_NEAR(j[0], 0.31173457703562754999, 1e-13);
    EXPECT_NEAR(j[1], 0.73392716576761930337, 1e-13);
    EXPECT_NEAR(j[2], -0.32702065372446162195, 1e-13);
    EXPECT_EQ(p.apply(obs, 2, 0.3, 0.4), j[2]);
}

TEST(HeatSemigroup, SemigroupProperty) {
    const HeatSemigroup p(96);
    const auto obs = registry("tanh");
    // P_{a+b} phi(z) = E[(P_a phi)(z + sqrt(b) Z)].
    const double composed = oracle::gaussian_mean([&](double u) { return p.apply(obs, 0, 0.2, u); }, 0.1, 0.3, 2000);
    EXPECT_NEAR(composed, p.apply(obs, 0, 0.5, 0.1), 1e-11);
}

TEST(HeatSemigroup, ZeroVarianceAndErrors) {
    const HeatSemigroup p(16);
    const auto obs = registry("tanh");
    EXPECT_EQ(p.apply(obs, 1, 0.0, 0.7), obs.phi1(0.7));
    EXPECT_THROW(p.apply(obs, 0, -1e-3, 0.7), DomainError);
    EXPECT_THROW(HeatSemigroup(1), ResolutionError);
    EXPECT_THROW(semigroup_apply(obs, 0, 0.1, 0.0, 1), ResolutionError);
}

TEST(SelectHermiteOrder, DoublesUntilAgreement) {
    EXPECT_EQ(select_hermite_order(registry("quadratic"), 1.0, -2.0, 2.0, 4), 4u);
    const auto order = select_hermite_order(registry("tanh"), 2.0, -3.0, 3.0, 4);
    EXPECT_GT(order, 4u);
    EXPECT_THROW(select_hermite_order(registry("tanh"), 2.0, -3.0, 3.0, 4, 1e-10, 8), ResolutionError);
}
