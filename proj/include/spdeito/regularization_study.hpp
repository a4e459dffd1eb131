#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdeito/spectral_kernel.hpp"
#include "spdeito/stransform_engine.hpp"

namespace spdeito {

enum class DivergenceQuantity { counterterm, grad_square_mean, renormalized_mean };

std::string_view to_string(DivergenceQuantity q);
DivergenceQuantity parse_quantity(std::string_view name);

/// Default ladder {1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5}.
std::vector<double> default_epsilon_ladder();

/// E[(d_x u^eps_t(x))^2] = sum exp(-2 lambda eps)(1 - exp(-2 lambda t)) 2 cos^2(pi n x) mu / (2 lambda).
double grad_square_mean(const EigenSystem& basis, double t, double x, double epsilon);
/// grad_square_mean - counterterm, summed mode by mode.
double renormalized_mean(const EigenSystem& basis, double t, double x, double epsilon);

/// Mode-n contribution to renormalized_mean.
double renormalized_mode(const EigenSystem& basis, std::size_t n, double t, double x, double epsilon);

/// Least-squares fit of log|value| against log(eps) over a strictly decreasing ladder.
struct DivergenceFit {
    DivergenceQuantity quantity = DivergenceQuantity::counterterm;
    double t = 0.0;
    double x = 0.0;
    std::vector<double> ladder;
    std::vector<double> values;
    /// |values[i] - values[i-1]| for i >= 1.
    std::vector<double> cauchy_diffs;
    /// Rounding level of the series sums; differences below it carry no information.
    double roundoff_floor = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;

    /// Each Cauchy difference is below its predecessor unless both are below the roundoff floor.
    bool cauchy_decreasing() const;
};

/// Throws ResolutionError when exp(-2 lambda_N min eps) >= 1e-12.
DivergenceFit divergence_fit(DivergenceQuantity quantity, double x, double t,
                             std::span<const double> ladder, const EigenSystem& basis);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit least_squares(std::span<const double> xs, std::span<const double> ys);

/// One (eps, term) entry of the convergence table.
struct ConvergenceRow {
    double epsilon = 0.0;
    std::string term;
    double value = 0.0;
    /// |value - value at the previous eps of the ladder|; NaN on the first rung.
    double cauchy_diff = 0.0;
};

struct ConvergenceTable {
    std::vector<double> ladder;
    std::vector<TermBreakdown> breakdowns;
    /// Terms at eps = 0 with the engine's graded mesh.
    TermBreakdown reference;
    std::vector<ConvergenceRow> rows;

    /// Values of one term along the ladder.
    std::vector<double> column(std::string_view term) const;
    std::string to_csv() const;
};

/// Term names reported by the table, in column order.
const std::vector<std::string>& convergence_terms();

/// Evaluates the S-transformed terms for every eps in the ladder, plus an eps = 0 reference.
ConvergenceTable epsilon_convergence_table(const EigenSystem& basis, const ObservableTriple& obs,
                                           const SpaceWindow& l, const ShiftField& f, double t,
                                           std::span<const double> ladder,
                                           const EngineOptions& options = {},
                                           std::size_t workers = 1);

/// JSON record of a fit (keys: quantity, t, x, ladder, values, cauchy_diffs, roundoff_floor,
/// slope, intercept, r_squared).
std::string fit_to_json(const DivergenceFit& fit);

}  // namespace spdeito
