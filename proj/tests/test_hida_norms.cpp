#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "spdeito/errors.hpp"
#include "spdeito/hida_norms.hpp"

using namespace spdeito;

namespace {

// |T^{-1/2} int_0^t exp(-lambda (t - s)) exp(-i omega s) ds|^2 from the complex antiderivative.
double coefficient_sq(double lambda, double t, double horizon, long k) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / horizon;
    const std::complex<double> z(lambda, -omega);
    const std::complex<double> c = (std::exp(std::complex<double>(0.0, -omega * t)) - std::exp(-lambda * t)) / z;
    return std::norm(c) / horizon;
}

}  // namespace

TEST(TimeCoefficients, FrozenQuadratureValues) {
    const double lam = 0.5 * 9.0 * std::numbers::pi * std::numbers::pi;
    // 40-digit quadrature of the Fourier integral.
    EXPECT_NEAR(time_coefficient_sq(lam, 0.5, 1.0, 0), 0.00050696208642104147178, 1e-17);
    EXPECT_NEAR(time_coefficient_sq(lam, 0.5, 1.0, 1), 0.00049701480232616214577, 1e-17);
    EXPECT_NEAR(time_coefficient_sq(lam, 0.5, 1.0, 5), 0.00033789553895714617859, 1e-17);
    EXPECT_NEAR(time_coefficient_total(lam, 0.5, 1.0), 0.011257909293593085715, 1e-16);
}

TEST(TimeCoefficients, ComplexFormAndParseval) {
    for (const double lam : {0.3, 5.0, 400.0}) {
        for (const long k : {0L, 3L, -7L, 1000L}) {
            EXPECT_NEAR(time_coefficient_sq(lam, 0.7, 2.0, k), coefficient_sq(lam, 0.7, 2.0, k),
                        1e-13 * coefficient_sq(lam, 0.7, 2.0, 0));
        }
        // Parseval: the lattice sum is the squared L2 norm of the truncated exponential.
        EXPECT_NEAR(time_coefficient_total(lam, 0.7, 2.0), -std::expm1(-2.0 * lam * 0.7) / (2.0 * lam),
                    1e-13 / lam);
    }
}

TEST(Multiplier, Conventions) {
    const auto fl = MultiplierConvention::floored_default();
    EXPECT_EQ(fl.nu(0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(fl.nu(-2, 1.0), 4.0 * std::numbers::pi);
    EXPECT_EQ(fl.name(), "floored(1)");
    EXPECT_EQ(MultiplierConvention::unit_multiplier().nu(9, 1.0), 1.0);
    EXPECT_EQ(parse_convention("unit").kind, MultiplierConvention::Kind::unit);
    EXPECT_THROW(parse_convention("log"), UnknownNameError);
}

TEST(HidaNorm, DirectDoubleSum) {
    const EigenSystem b(32);
    const double t = 0.5, x = 0.3;
    const std::size_t R = 512;
    const auto h = hida_norm_dxx(t, x, MultiplierConvention::floored_default(), b, 1.0, R);
    double ref = 0.0;
    for (std::size_t n = 1; n <= b.n_modes(); ++n) {
        const double en = b.e(n, x);
        for (long k = -static_cast<long>(R) + 1; k < static_cast<long>(R); ++k) {
            const double nu = std::max(1.0, 2.0 * std::numbers::pi * std::abs(k));
            ref += std::pow(nu, -4) * coefficient_sq(b.lambda(n), t, 1.0, k) * en * en;
        }
    }
    EXPECT_NEAR(h.norm, ref, 1e-12 * ref);
    EXPECT_LE(h.ratio, 1.0 + 1e-8);
}

TEST(HidaNorm, UnitConventionIsParseval) {
    const EigenSystem b(256);
    const auto h = hida_norm_dxx(0.5, 0.5, MultiplierConvention::unit_multiplier(), b, 1.0, 64);
    EXPECT_NEAR(h.ratio, 1.0, 1e-12);
    EXPECT_NEAR(h.upper_bound, sigma2(b, 0.5, 0.5), 0.0);
}

TEST(HidaNorm, StableUnderRefinement) {
    const auto fl = MultiplierConvention::floored_default();
    const auto base = hida_norm_dxx(0.5, 0.5, fl, EigenSystem(256), 1.0, 4096);
    const auto more_modes = hida_norm_dxx(0.5, 0.5, fl, EigenSystem(512), 1.0, 4096);
    const auto more_freq = hida_norm_dxx(0.5, 0.5, fl, EigenSystem(256), 1.0, 8192);
    EXPECT_GE(more_modes.norm, base.norm);
    EXPECT_LT(std::abs(more_modes.norm - base.norm), 1e-6 * base.norm);
    EXPECT_LT(std::abs(more_freq.norm - base.norm), 1e-10 * base.norm);
    EXPECT_NEAR(base.norm, 0.0700440931, 1e-10);
}

TEST(HidaNorm, ResolutionAndDomainErrors) {
    const EigenSystem b(64);
    const auto fl = MultiplierConvention::floored_default();
    EXPECT_THROW(hida_norm_dxx(0.5, 0.5, fl, b, 1.0, 2), ResolutionError);
    EXPECT_THROW(hida_norm_dxx(0.0, 0.5, fl, b, 1.0), DomainError);
    EXPECT_THROW(hida_norm_dxx(1.5, 0.5, fl, b, 1.0), DomainError);
    EXPECT_THROW(hida_norm_dxx(0.5, 1.5, fl, b, 1.0), DomainError);
    EXPECT_DOUBLE_EQ(spatial_reduce(b, 3, -b.mu(3) * 2.0), 2.0);
}
