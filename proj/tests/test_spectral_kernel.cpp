#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "spdeito/errors.hpp"
#include "spdeito/quadrature.hpp"
#include "spdeito/spectral_kernel.hpp"

using namespace spdeito;

namespace {

const EigenSystem kBasis(128);

}  // namespace

TEST(EigenSystem, EigenfunctionsAndEigenvalues) {
    const EigenSystem b(16, 0.25);
    EXPECT_DOUBLE_EQ(b.mu(3), 9.0 * std::numbers::pi * std::numbers::pi);
    EXPECT_DOUBLE_EQ(b.lambda(3), 0.25 * b.mu(3));
    EXPECT_NEAR(b.e(2, 0.125), std::sqrt(2.0) * std::sin(std::numbers::pi / 4.0), 1e-15);
    const double h = 1e-4;
    EXPECT_NEAR(b.de(5, 0.3), (b.e(5, 0.3 + h) - b.e(5, 0.3 - h)) / (2 * h), 1e-5);
    EXPECT_DOUBLE_EQ(b.d2e(5, 0.3), -b.mu(5) * b.e(5, 0.3));
    EXPECT_THROW(EigenSystem(0), DomainError);
    EXPECT_THROW(EigenSystem(4, 0.0), DomainError);
}

TEST(Kernel, MatchesMethodOfImages) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double t = 0.002 + 0.998 * u(rng), x = u(rng), y = u(rng);
        const double ref = oracle::image_kernel(t, x, y);
        EXPECT_NEAR(kernel(kBasis, {t, x, y, 0.0}), ref, 1e-12 * std::max(1.0, std::abs(ref)));
        const double ref2 = oracle::image_kernel_dxx(t, x, y);
        EXPECT_NEAR(kernel_dxx(kBasis, {t, x, y, 0.0}), ref2, 1e-10 * std::max(1.0, std::abs(ref2)));
    }
}

TEST(Kernel, EpsilonShiftsTime) {
    EXPECT_DOUBLE_EQ(kernel(kBasis, {0.1, 0.3, 0.6, 0.05}), kernel(kBasis, {0.15, 0.3, 0.6, 0.0}));
}

TEST(Kernel, OtherDiffusivity) {
    const EigenSystem b(128, 1.0);
    EXPECT_NEAR(kernel(b, {0.05, 0.4, 0.45, 0.0}), oracle::image_kernel(0.05, 0.4, 0.45, 1.0), 1e-12);
}

TEST(Kernel, SymmetricAndVanishingOnBoundary) {
    for (const double t : {0.01, 0.2, 1.0}) {
        const double k = kernel(kBasis, {t, 0.2, 0.7, 0.0});
        EXPECT_NEAR(kernel(kBasis, {t, 0.7, 0.2, 0.0}), k, 1e-15);
        EXPECT_NEAR(kernel(kBasis, {t, 0.0, 0.4, 0.0}), 0.0, 1e-14);
        EXPECT_NEAR(kernel(kBasis, {t, 1.0, 0.4, 0.0}), 0.0, 1e-12);
    }
}

TEST(Kernel, DegenerateAndInvalidQueries) {
    EXPECT_THROW(kernel(kBasis, {0.0, 0.3, 0.3, 0.0}), DegenerateTimeError);
    EXPECT_THROW(kernel(kBasis, {0.1, 1.5, 0.3, 0.0}), DomainError);
    EXPECT_THROW(kernel(kBasis, {-0.1, 0.5, 0.3, 0.0}), DomainError);
}

TEST(Kernel, ChapmanKolmogorovBySimpson) {
    const double t = 0.04, s = 0.07, x = 0.3, y = 0.8;
    const double conv = oracle::simpson([&](double z) { return kernel(kBasis, {t, x, z, 0.0}) * kernel(kBasis, {s, z, y, 0.0}); },
                                        0.0, 1.0, 4000);
    EXPECT_NEAR(conv, kernel(kBasis, {t + s, x, y, 0.0}), 1e-11);
}

// sigma2 is the time integral of g_{2(s+eps)}(x, x).
TEST(Sigma2, TimeIntegralOfImageKernelOnDiagonal) {
    const double eps = 0.01;
    for (const double x : {0.1, 0.5, 0.77}) {
        for (const double t : {0.1, 1.0}) {
            const double ref = oracle::simpson_graded([&](double s) { return oracle::image_kernel(2.0 * (s + eps), x, x); }, eps, t, 4000);
            EXPECT_NEAR(sigma2(kBasis, t, x, eps), ref, 1e-10 * ref) << x << ' ' << t;
        }
    }
}

TEST(Sigma2, FrozenValues) {
    // 40-digit summation of the truncated series.
    EXPECT_NEAR(sigma2(kBasis, 0.5, 0.3, 0.0), 0.20825879578402169647, 2e-16);
    EXPECT_NEAR(sigma2(kBasis, 1.0, 0.5, 0.01), 0.19357154539014606009, 2e-16);
    EXPECT_NEAR(sigma2(EigenSystem(4096), 1e6, 0.3, 0.0), 0.20997526755599552167, 1e-15);
}

TEST(Sigma2, StationaryLimit) {
    // sum e_n(x)^2 / (2 lambda_n) = x (1 - x) / (2 kappa), with a tail below 1 / (kappa pi^2 N).
    const EigenSystem b(1 << 16);
    for (const double x : {0.25, 0.5, 0.9}) {
        EXPECT_NEAR(sigma2(b, 1e6, x, 0.0), x * (1.0 - x), 1.0 / (0.5 * std::numbers::pi * std::numbers::pi * (1 << 16)));
    }
}

TEST(Sigma2, RateIsDerivative) {
    const double h = 1e-5;
    for (const double eps : {0.0, 0.003}) {
        const double fd = (sigma2(kBasis, 0.3 + h, 0.4, eps) - sigma2(kBasis, 0.3 - h, 0.4, eps)) / (2 * h);
        EXPECT_NEAR(sigma2_rate(kBasis, 0.3, 0.4, eps), fd, 1e-7 * std::abs(fd));
    }
    EXPECT_THROW(sigma2_rate(kBasis, 0.0, 0.4, 0.0), DegenerateTimeError);
}

TEST(Counterterm, ImageKernelAtDoubledTime) {
    const EigenSystem b(1024);
    for (const double x : {0.2, 0.5}) {
        for (const double eps : {1e-3, 1e-2}) {
            const double ref = oracle::image_kernel(2.0 * eps, x, x);
            EXPECT_NEAR(counterterm(b, x, eps), ref, 1e-12 * ref);
        }
    }
    EXPECT_NEAR(counterterm(b, 0.5, 1e-3), 8.9206205807638555727, 1e-13);
    EXPECT_THROW(counterterm(b, 0.5, 0.0), DomainError);
}

TEST(WickCorrection, DifferenceOfDiagonalKernels) {
    const double s = 0.5, x = 0.3, eps = 1e-3;
    const double ref = -0.5 * (oracle::image_kernel(2.0 * eps, x, x) - oracle::image_kernel(2.0 * (eps + s), x, x));
    EXPECT_NEAR(wick_correction(kBasis, s, x, eps), ref, 1e-10 * std::abs(ref));
    EXPECT_NEAR(wick_correction(kBasis, s, x, eps), -4.4556493684776310934, 1e-13);
}

TEST(WickCorrection, LeibnizIdentity) {
    for (const double eps : {1e-3, 1e-2}) {
        for (const double x : {0.2, 0.6}) {
            const double rate = sigma2_rate(kBasis, 0.4, x, eps);
            const double rhs = counterterm(kBasis, x, eps) + 2.0 * wick_correction(kBasis, 0.4, x, eps);
            EXPECT_NEAR(rate, rhs, 1e-12 * std::abs(counterterm(kBasis, x, eps)));
        }
    }
}

TEST(HeatEquation, KernelSolvesHeatEquation) {
    const double t = 0.2, x = 0.35, y = 0.6, h = 1e-6;
    const double dt = (kernel(kBasis, {t + h, x, y, 0.0}) - kernel(kBasis, {t - h, x, y, 0.0})) / (2 * h);
    EXPECT_NEAR(dt, kBasis.kappa() * kernel_dxx(kBasis, {t, x, y, 0.0}), 1e-7);
}

TEST(Envelope, Kinds) {
    EXPECT_EQ(Envelope::constant(2.5)(0.7), 2.5);
    EXPECT_DOUBLE_EQ(Envelope::polynomial({1.0, -2.0, 3.0})(0.5), 1.0 - 1.0 + 0.75);
    EXPECT_DOUBLE_EQ(Envelope::sine(0.5, 3.0, 0.2)(0.4), 0.5 * std::sin(1.4));
    EXPECT_DOUBLE_EQ(Envelope::exponential(2.0, -1.0)(1.0), 2.0 * std::exp(-1.0));
}

TEST(ShiftField, ValidationAndNorm) {
    EXPECT_THROW(ShiftField(1.0, {{0, Envelope::constant(1.0)}}), DomainError);
    EXPECT_THROW(ShiftField(1.0, {{2, Envelope::constant(1.0)}, {2, Envelope::constant(1.0)}}), DomainError);
    EXPECT_THROW(ShiftField(0.0, {}), DomainError);
    const ShiftField f(2.0, {{1, Envelope::constant(1.0)}, {3, Envelope::sine(0.5, 3.0, 0.2)}});
    const double ref = 2.0 + oracle::simpson([](double s) { return 0.25 * std::pow(std::sin(3.0 * s + 0.2), 2); }, 0.0, 2.0);
    EXPECT_NEAR(f.squared_norm(), ref, 1e-12);
    EXPECT_DOUBLE_EQ(f(0.3, 0.25), 1.0 * std::sqrt(2.0) * std::sin(std::numbers::pi * 0.25) +
                                       0.5 * std::sin(1.1) * std::sqrt(2.0) * std::sin(3.0 * std::numbers::pi * 0.25));
    EXPECT_EQ(f.mode(2, 0.3), 0.0);
}

TEST(MeanBundle, ModeAmplitudeAndRate) {
    const double lam = kBasis.lambda(3);
    EXPECT_NEAR(mean_mode(lam, Envelope::sine(0.5, 3.0, 0.2), 0.7), 0.0088613155025167867356, 1e-16);
    const ShiftField f(1.0, {{1, Envelope::constant(1.0)}, {3, Envelope::sine(0.5, 3.0, 0.2)}});
    const double h = 1e-5;
    const auto b = mean_bundle(kBasis, 0.4, 0.3, f);
    const double fd = (mean_bundle(kBasis, 0.4 + h, 0.3, f).m - mean_bundle(kBasis, 0.4 - h, 0.3, f).m) / (2 * h);
    EXPECT_NEAR(b.m_rate, fd, 1e-8);
    // m solves dm/dt = f + kappa m_xx with m(0) = 0; mode 1 has m = (1 - exp(-lambda t)) / lambda.
    const double l1 = kBasis.lambda(1);
    const auto only1 = mean_bundle(kBasis, 0.4, 0.3, ShiftField(1.0, {{1, Envelope::constant(1.0)}}));
    EXPECT_NEAR(only1.m, -std::expm1(-l1 * 0.4) / l1 * kBasis.e(1, 0.3), 1e-14);
    EXPECT_THROW(mean_bundle(kBasis, 1.5, 0.3, f), HorizonError);
}

TEST(ModalGrid, SynthesisAndProjection) {
    const auto rule = gauss_legendre(64, 0.0, 1.0);
    const EigenSystem b(16);
    const ModalGrid g(b, rule.nodes);
    std::vector<double> c(16, 0.0), out(64), back(16);
    c[2] = 1.5;
    c[7] = -0.25;
    g.synthesize(c, out);
    for (std::size_t j = 0; j < out.size(); ++j) {
        EXPECT_NEAR(out[j], 1.5 * b.e(3, rule.nodes[j]) - 0.25 * b.e(8, rule.nodes[j]), 1e-14);
        out[j] *= rule.weights[j];
    }
    g.project(out, back);
    for (std::size_t n = 0; n < 16; ++n) EXPECT_NEAR(back[n], c[n], 1e-13);
}
