#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spdeito {

/// Dirichlet sine eigenbasis of -d^2/dx^2 on [0, 1] truncated at `n_modes`.
///
/// The spatial eigenvalue mu(n) = pi^2 n^2 is kept separate from the temporal
/// decay rate lambda(n) = kappa * mu(n), so that the kernel solves
/// d/dt g = kappa d^2/dx^2 g for any diffusivity. kappa = 1/2 is the default.
/// Mode indices run from 1 to n_modes.
class EigenSystem {
public:
    explicit EigenSystem(std::size_t n_modes, double kappa = 0.5);

    std::size_t n_modes() const { return n_modes_; }
    double kappa() const { return kappa_; }

    double mu(std::size_t n) const;
    double lambda(std::size_t n) const { return kappa_ * mu(n); }

    /// e(n, x) = sqrt(2) sin(pi n x).
    double e(std::size_t n, double x) const;
    /// d/dx e(n, x) = sqrt(2) pi n cos(pi n x).
    double de(std::size_t n, double x) const;
    /// d^2/dx^2 e(n, x) = -mu(n) e(n, x).
    double d2e(std::size_t n, double x) const;

private:
    std::size_t n_modes_;
    double kappa_;
};

struct KernelQuery {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double epsilon = 0.0;
};

/// g_{t+eps}(x, y), truncated spectral sum.
double kernel(const EigenSystem& basis, const KernelQuery& q);
/// d^2/dx^2 g_{t+eps}(x, y).
double kernel_dxx(const EigenSystem& basis, const KernelQuery& q);

/// Variance of u^eps_t(x): sum exp(-2 lambda eps) (1 - exp(-2 lambda t)) / (2 lambda) e(n,x)^2.
double sigma2(const EigenSystem& basis, double t, double x, double epsilon = 0.0);
/// d/ds sigma2(s, x, eps) = g_{2(s+eps)}(x, x).
double sigma2_rate(const EigenSystem& basis, double s, double x, double epsilon = 0.0);
/// Renormalization counterterm int_0^1 g_eps(x, y)^2 dy; eps > 0.
double counterterm(const EigenSystem& basis, double x, double epsilon);
/// Wick covariance correction -1/2 sum exp(-2 lambda eps)(1 - exp(-2 lambda s)) e(n,x)^2.
///
/// Equals kappa * E[u^eps_s(x) d^2/dx^2 u^eps_s(x)], the time integral of
/// int_0^1 g dg/dt dy. With it, sigma2_rate = counterterm + 2 wick_correction.
double wick_correction(const EigenSystem& basis, double s, double x, double epsilon = 0.0);

// Per-mode coefficients of the series above, shared with the bulk evaluators.
namespace mode_coeff {
double sigma2(double lambda, double t, double epsilon);
double sigma2_rate(double lambda, double s, double epsilon);
double wick_correction(double lambda, double s, double epsilon);
}  // namespace mode_coeff

/// Smooth time envelope tau(s) of one shift-field mode.
class Envelope {
public:
    enum class Kind { constant, polynomial, sine, exponential };

    static Envelope constant(double value);
    /// sum_i c_i s^i.
    static Envelope polynomial(std::vector<double> coefficients);
    /// amplitude sin(omega s + phase).
    static Envelope sine(double amplitude, double omega, double phase);
    /// amplitude exp(rate s).
    static Envelope exponential(double amplitude, double rate);

    double operator()(double s) const;
    Kind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }

private:
    Envelope(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    Kind kind_;
    std::vector<double> params_;
};

struct ShiftMode {
    std::size_t n;
    Envelope tau;
};

/// Deterministic space-time field f(s, y) = sum_n tau_n(s) e(n, y) on [0, T] x [0, 1].
class ShiftField {
public:
    ShiftField() = default;
    ShiftField(double horizon, std::vector<ShiftMode> modes);

    static ShiftField zero(double horizon) { return ShiftField(horizon, {}); }

    double horizon() const { return horizon_; }
    const std::vector<ShiftMode>& modes() const { return modes_; }
    bool is_zero() const { return modes_.empty(); }

    /// tau_n(s); zero for modes that are not listed.
    double mode(std::size_t n, double s) const;
    double operator()(double s, double y) const;
    /// int_0^T int_0^1 f^2 dy ds by adaptive quadrature of each envelope.
    double squared_norm() const;

private:
    double horizon_ = 0.0;
    std::vector<ShiftMode> modes_;
};

/// Per-mode amplitude of the Girsanov mean: int_0^t exp(-lambda (t - s)) tau(s) ds.
double mean_mode(double lambda, const Envelope& tau, double t);

struct MeanBundle {
    double m = 0.0;
    double m_dxx = 0.0;
    double m_rate = 0.0;
};

/// Mean m(t, x) = int_0^t int_0^1 g_{t-s+eps}(x, y) f(s, y) dy ds, its second space
/// derivative, and its time derivative f_eps(t, x) + kappa m_dxx (f_eps is f with each
/// mode damped by exp(-lambda eps)).
MeanBundle mean_bundle(const EigenSystem& basis, double t, double x, const ShiftField& f,
                       double epsilon = 0.0);

/// Eigenfunction values on a fixed set of points, for bulk series evaluation.
///
/// Row-major table: values(n, j) = e(n, x_j) with n in 1..N.
class ModalGrid {
public:
    ModalGrid(const EigenSystem& basis, std::span<const double> points);

    std::size_t n_modes() const { return n_modes_; }
    std::size_t n_points() const { return points_.size(); }
    const std::vector<double>& points() const { return points_; }

    double e(std::size_t n, std::size_t j) const { return e_[(n - 1) * points_.size() + j]; }
    double de(std::size_t n, std::size_t j) const { return de_[(n - 1) * points_.size() + j]; }

    /// out_j = sum_n coeff[n-1] e(n, x_j).
    void synthesize(std::span<const double> coeff, std::span<double> out) const;
    /// out_j = sum_n coeff[n-1] e'(n, x_j).
    void synthesize_dx(std::span<const double> coeff, std::span<double> out) const;
    /// out_j = sum_n coeff[n-1] e(n, x_j)^2.
    void synthesize_squared(std::span<const double> coeff, std::span<double> out) const;
    /// out[n-1] = sum_j w_j e(n, x_j) values_j.
    void project(std::span<const double> weighted_values, std::span<double> out) const;

private:
    std::size_t n_modes_;
    std::vector<double> points_;
    std::vector<double> e_;
    std::vector<double> de_;
    std::vector<double> e2_;
};

}  // namespace spdeito
