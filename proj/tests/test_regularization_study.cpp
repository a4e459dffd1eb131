#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "spdeito/errors.hpp"
#include "spdeito/regularization_study.hpp"

using namespace spdeito;

namespace {

const EigenSystem kBasis(1024);

}  // namespace

TEST(GradSquareMean, ImageKernelMixedDerivative) {
    for (const double x : {0.5, 0.23}) {
        const double eps = 1e-3, t = 0.5;
        const double ref =
            oracle::simpson_graded([&](double s) { return oracle::image_kernel_dxdy(2.0 * (s + eps), x, x); }, eps, t, 4000);
        EXPECT_NEAR(grad_square_mean(kBasis, t, x, eps), ref, 1e-11 * ref) << x;
    }
    // 40-digit summation of the truncated series.
    EXPECT_NEAR(grad_square_mean(kBasis, 0.5, 0.5, 1e-3), 7.9206205756203966375, 1e-13);
}

TEST(RenormalizedMean, FrozenValueAndModeSum) {
    const double v = renormalized_mean(kBasis, 0.5, 0.37, 1e-4);
    EXPECT_NEAR(v, -1.0022664649028784209, 1e-11);
    double s = 0.0;
    for (std::size_t n = 1; n <= kBasis.n_modes(); ++n) s += renormalized_mode(kBasis, n, 0.5, 0.37, 1e-4);
    EXPECT_NEAR(s, v, 1e-11);
    EXPECT_NEAR(v, grad_square_mean(kBasis, 0.5, 0.37, 1e-4) - counterterm(kBasis, 0.37, 1e-4), 1e-11);
    EXPECT_THROW(renormalized_mean(kBasis, 0.5, 0.37, 0.0), DomainError);
}

TEST(RenormalizedMode, ClosedFormAtHalfDiffusivity) {
    const double pi = 3.14159265358979323846;
    const double t = 0.5, x = 0.37, eps = 1e-3;
    for (std::size_t n : {1, 7, 100}) {
        const double lam = kBasis.lambda(n);
        const double c = std::cos(pi * n * x);
        const double expected = std::exp(-2.0 * lam * eps) * (2.0 * std::cos(2.0 * pi * n * x) - 2.0 * std::exp(-2.0 * lam * t) * c * c);
        EXPECT_NEAR(renormalized_mode(kBasis, n, t, x, eps), expected, 1e-14);
    }
}

TEST(LeastSquares, RecoversLine) {
    const std::vector<double> xs{0.0, 1.0, 2.0, 4.0};
    std::vector<double> ys;
    for (const double x : xs) ys.push_back(3.0 - 0.5 * x);
    const auto fit = least_squares(xs, ys);
    EXPECT_NEAR(fit.slope, -0.5, 1e-15);
    EXPECT_NEAR(fit.intercept, 3.0, 1e-15);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-15);
    const std::vector<double> same{1.0, 1.0};
    EXPECT_THROW(least_squares(same, same), DomainError);
}

TEST(DivergenceFit, CountertermSlopeIsMinusHalf) {
    const auto ladder = default_epsilon_ladder();
    const auto fit = divergence_fit(DivergenceQuantity::counterterm, 0.5, 0.5, ladder, kBasis);
    EXPECT_NEAR(fit.slope, -0.5, 1e-3);
    EXPECT_EQ(fit.values.size(), ladder.size());
    EXPECT_EQ(fit.cauchy_diffs.size(), ladder.size() - 1);
    for (std::size_t i = 1; i < fit.values.size(); ++i) EXPECT_GT(fit.values[i], fit.values[i - 1]);
}

TEST(DivergenceFit, RenormalizedMeanConverges) {
    const auto ladder = default_epsilon_ladder();
    const auto fit = divergence_fit(DivergenceQuantity::renormalized_mean, 0.37, 0.5, ladder, kBasis);
    EXPECT_TRUE(fit.cauchy_decreasing());
    EXPECT_GT(fit.slope, -0.05);
    EXPECT_GT(fit.roundoff_floor, 0.0);
}

TEST(DivergenceFit, CauchyDecreasingIgnoresRoundoffPlateau) {
    DivergenceFit f;
    f.roundoff_floor = 1e-12;
    f.cauchy_diffs = {1e-3, 1e-5, 5e-13, 8e-13};
    EXPECT_TRUE(f.cauchy_decreasing());
    f.cauchy_diffs = {1e-3, 2e-3};
    EXPECT_FALSE(f.cauchy_decreasing());
}

TEST(DivergenceFit, Validation) {
    const std::vector<double> increasing{1e-3, 1e-2};
    EXPECT_THROW(divergence_fit(DivergenceQuantity::counterterm, 0.5, 0.5, increasing, kBasis), DomainError);
    const std::vector<double> single{1e-3};
    EXPECT_THROW(divergence_fit(DivergenceQuantity::counterterm, 0.5, 0.5, single, kBasis), DomainError);
    const auto ladder = default_epsilon_ladder();
    EXPECT_THROW(divergence_fit(DivergenceQuantity::counterterm, 0.5, 0.5, ladder, EigenSystem(64)), ResolutionError);
    EXPECT_EQ(parse_quantity(to_string(DivergenceQuantity::grad_square_mean)), DivergenceQuantity::grad_square_mean);
    EXPECT_THROW(parse_quantity("energy"), UnknownNameError);
}

TEST(FitJson, Keys) {
    const auto fit = divergence_fit(DivergenceQuantity::counterterm, 0.5, 0.5, default_epsilon_ladder(), kBasis);
    const auto j = nlohmann::json::parse(fit_to_json(fit));
    for (const char* key : {"quantity", "t", "x", "ladder", "values", "cauchy_diffs", "roundoff_floor", "slope",
                            "intercept", "r_squared"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["quantity"], "counterterm");
}

TEST(ConvergenceTable, ShapeAndResiduals) {
    const EigenSystem b(32);
    EngineOptions o;
    o.legendre_points = 96;
    o.stieltjes_panels = 32;
    const ShiftField f(1.0, {{1, Envelope::constant(1.0)}});
    const std::vector<double> ladder{1e-2, 1e-3};
    const auto table = epsilon_convergence_table(b, registry("tanh"), window_registry("poly_bump"), f, 0.5, ladder, o, 2);
    ASSERT_EQ(table.breakdowns.size(), 2u);
    for (const auto& br : table.breakdowns) EXPECT_LT(br.relative_residual(), 1e-6);
    EXPECT_LT(table.reference.relative_residual(), 1e-6);
    EXPECT_EQ(table.column("lhs").size(), 2u);
    EXPECT_THROW(table.column("energy"), UnknownNameError);

    std::istringstream is(table.to_csv());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "epsilon,term,value,cauchy_diff");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, convergence_terms().size() * (ladder.size() + 1));
}
