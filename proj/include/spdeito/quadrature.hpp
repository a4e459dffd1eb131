#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spdeito {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [a, b]. Nodes are computed by Newton iteration on the
/// Legendre recurrence; the reference rule on [-1, 1] is cached per order.
QuadratureRule gauss_legendre(std::size_t order, double a = -1.0, double b = 1.0);

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line (cached per order).
const QuadratureRule& gauss_hermite(std::size_t order);

/// Composite Gauss-Legendre rule on [0, t] over the graded mesh s_k = t (k/K)^2.
///
/// Each panel is integrated in the variable r = sqrt(s/t), so an integrand that
/// behaves like s^{-1/2} at the origin becomes smooth. The returned weights
/// already include the Jacobian ds = 2 t r dr.
QuadratureRule graded_rule(double t, std::size_t panels, std::size_t points_per_panel);

/// Composite Gauss-Legendre rule with uniform panels on [a, b].
QuadratureRule composite_rule(double a, double b, std::size_t panels, std::size_t points_per_panel);

/// Adaptive Gauss-Legendre integration of f on [a, b].
///
/// A panel is accepted when its 16-point value agrees with the sum over its two
/// halves; otherwise it is bisected. The global target is
/// max(abs_tol, rel_tol * integral of |f|), split evenly on each bisection.
double adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-14, double abs_tol = 1e-300,
                               int max_depth = 24);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double value);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Pairwise summation; the result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

}  // namespace spdeito
