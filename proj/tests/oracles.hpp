#pragma once

// Reference computations that share no code with the library: the method of
// images for the Dirichlet heat kernel, composite Simpson rules, and dense
// trapezoid sums for Gaussian expectations.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double gauss(double z, double kappa, double tau) {
    return std::exp(-z * z / (4.0 * kappa * tau)) / std::sqrt(4.0 * std::numbers::pi * kappa * tau);
}

inline double gauss_dd(double z, double kappa, double tau) {
    const double a = 2.0 * kappa * tau;
    return gauss(z, kappa, tau) * (z * z / (a * a) - 1.0 / a);
}

/// Dirichlet heat kernel of d/dt = kappa d^2/dx^2 on [0, 1] by images.
inline double image_kernel(double tau, double x, double y, double kappa = 0.5) {
    double s = 0.0;
    for (int k = -12; k <= 12; ++k) {
        s += gauss(x - y + 2.0 * k, kappa, tau) - gauss(x + y + 2.0 * k, kappa, tau);
    }
    return s;
}

/// d^2/dx^2 of the image kernel.
inline double image_kernel_dxx(double tau, double x, double y, double kappa = 0.5) {
    double s = 0.0;
    for (int k = -12; k <= 12; ++k) {
        s += gauss_dd(x - y + 2.0 * k, kappa, tau) - gauss_dd(x + y + 2.0 * k, kappa, tau);
    }
    return s;
}

/// d/dx d/dy of the image kernel.
inline double image_kernel_dxdy(double tau, double x, double y, double kappa = 0.5) {
    double s = 0.0;
    for (int k = -12; k <= 12; ++k) {
        s += -gauss_dd(x - y + 2.0 * k, kappa, tau) - gauss_dd(x + y + 2.0 * k, kappa, tau);
    }
    return s;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// int_0^t f(s) ds for f singular like (s + eps)^{-a}, Simpson in r = log(1 + s / eps).
inline double simpson_graded(const std::function<double(double)>& f, double eps, double t, int n = 2000) {
    return simpson([&](double r) { return f(eps * std::expm1(r)) * eps * std::exp(r); }, 0.0, std::log1p(t / eps), n);
}

/// E[phi(z + sqrt(v) Z)] by a dense trapezoid sum on [-12, 12].
inline double gaussian_mean(const std::function<double(double)>& phi, double z, double v, int n = 4000) {
    const double h = 24.0 / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = -12.0 + i * h;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        s += w * phi(z + std::sqrt(v) * u) * std::exp(-0.5 * u * u);
    }
    return s * h / std::sqrt(2.0 * std::numbers::pi);
}

/// Sample mean and variance in one pass.
struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0;
    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / (n - 1.0); }
    double std_error() const { return std::sqrt(variance() / n); }
};

}  // namespace oracle
