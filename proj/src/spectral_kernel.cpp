#include "spdeito/spectral_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spdeito/errors.hpp"
#include "spdeito/quadrature.hpp"

namespace spdeito {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double pi2 = pi * pi;
const double sqrt2 = std::sqrt(2.0);

void check_position(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError(std::string(what) + ": position " + std::to_string(x) + " outside [0, 1]");
    }
}

void check_nonnegative(double v, const char* what, const char* name) {
    if (!(v >= 0.0)) throw DomainError(std::string(what) + ": " + name + " must be >= 0");
}

// Sum a per-mode series from the highest mode down; high modes are the smallest terms.
template <typename Term>
double mode_sum(std::size_t n_modes, Term term) {
    CompensatedSum acc;
    for (std::size_t n = n_modes; n >= 1; --n) acc.add(term(n));
    return acc.value();
}

}  // namespace

EigenSystem::EigenSystem(std::size_t n_modes, double kappa) : n_modes_(n_modes), kappa_(kappa) {
    if (n_modes == 0) throw DomainError("EigenSystem: n_modes must be positive");
    if (!(kappa > 0.0)) throw DomainError("EigenSystem: kappa must be positive");
}

double EigenSystem::mu(std::size_t n) const {
    const double nd = static_cast<double>(n);
    return pi2 * nd * nd;
}

double EigenSystem::e(std::size_t n, double x) const {
    return sqrt2 * std::sin(pi * static_cast<double>(n) * x);
}

double EigenSystem::de(std::size_t n, double x) const {
    const double k = pi * static_cast<double>(n);
    return sqrt2 * k * std::cos(k * x);
}

double EigenSystem::d2e(std::size_t n, double x) const { return -mu(n) * e(n, x); }

namespace {

void check_query(const KernelQuery& q, const char* what) {
    check_position(q.x, what);
    check_position(q.y, what);
    check_nonnegative(q.t, what, "t");
    check_nonnegative(q.epsilon, what, "epsilon");
    if (q.t + q.epsilon == 0.0) {
        throw DegenerateTimeError(std::string(what) + ": t + epsilon = 0, the kernel is a delta");
    }
}

}  // namespace

double kernel(const EigenSystem& basis, const KernelQuery& q) {
    check_query(q, "kernel");
    const double tau = q.t + q.epsilon;
    return mode_sum(basis.n_modes(), [&](std::size_t n) {
        return std::exp(-basis.lambda(n) * tau) * basis.e(n, q.x) * basis.e(n, q.y);
    });
}

double kernel_dxx(const EigenSystem& basis, const KernelQuery& q) {
    check_query(q, "kernel_dxx");
    const double tau = q.t + q.epsilon;
    return mode_sum(basis.n_modes(), [&](std::size_t n) {
        return -basis.mu(n) * std::exp(-basis.lambda(n) * tau) * basis.e(n, q.x) * basis.e(n, q.y);
    });
}

namespace mode_coeff {

double sigma2(double lambda, double t, double epsilon) {
    return std::exp(-2.0 * lambda * epsilon) * (-std::expm1(-2.0 * lambda * t)) / (2.0 * lambda);
}

double sigma2_rate(double lambda, double s, double epsilon) {
    return std::exp(-2.0 * lambda * (s + epsilon));
}

double wick_correction(double lambda, double s, double epsilon) {
    return 0.5 * std::exp(-2.0 * lambda * epsilon) * std::expm1(-2.0 * lambda * s);
}

}  // namespace mode_coeff

double sigma2(const EigenSystem& basis, double t, double x, double epsilon) {
    check_position(x, "sigma2");
    check_nonnegative(t, "sigma2", "t");
    check_nonnegative(epsilon, "sigma2", "epsilon");
    return mode_sum(basis.n_modes(), [&](std::size_t n) {
        const double en = basis.e(n, x);
        return mode_coeff::sigma2(basis.lambda(n), t, epsilon) * en * en;
    });
}

double sigma2_rate(const EigenSystem& basis, double s, double x, double epsilon) {
    check_position(x, "sigma2_rate");
    check_nonnegative(s, "sigma2_rate", "s");
    check_nonnegative(epsilon, "sigma2_rate", "epsilon");
    if (s + epsilon == 0.0) throw DegenerateTimeError("sigma2_rate: s + epsilon = 0, rate diverges");
    return mode_sum(basis.n_modes(), [&](std::size_t n) {
        const double en = basis.e(n, x);
        return mode_coeff::sigma2_rate(basis.lambda(n), s, epsilon) * en * en;
    });
}

double counterterm(const EigenSystem& basis, double x, double epsilon) {
    check_position(x, "counterterm");
    if (!(epsilon > 0.0)) throw DomainError("counterterm: epsilon must be > 0 (the series diverges)");
    return sigma2_rate(basis, 0.0, x, epsilon);
}

double wick_correction(const EigenSystem& basis, double s, double x, double epsilon) {
    check_position(x, "wick_correction");
    check_nonnegative(s, "wick_correction", "s");
    check_nonnegative(epsilon, "wick_correction", "epsilon");
    return mode_sum(basis.n_modes(), [&](std::size_t n) {
        const double en = basis.e(n, x);
        return mode_coeff::wick_correction(basis.lambda(n), s, epsilon) * en * en;
    });
}

// ---------------------------------------------------------------------------
// Shift fields

Envelope Envelope::constant(double value) { return Envelope(Kind::constant, {value}); }

Envelope Envelope::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) coefficients.push_back(0.0);
    return Envelope(Kind::polynomial, std::move(coefficients));
}

Envelope Envelope::sine(double amplitude, double omega, double phase) {
    return Envelope(Kind::sine, {amplitude, omega, phase});
}

Envelope Envelope::exponential(double amplitude, double rate) {
    return Envelope(Kind::exponential, {amplitude, rate});
}

double Envelope::operator()(double s) const {
    switch (kind_) {
        case Kind::constant:
            return params_[0];
        case Kind::polynomial: {
            double acc = 0.0;
            for (auto it = params_.rbegin(); it != params_.rend(); ++it) acc = acc * s + *it;
            return acc;
        }
        case Kind::sine:
            return params_[0] * std::sin(params_[1] * s + params_[2]);
        case Kind::exponential:
            return params_[0] * std::exp(params_[1] * s);
    }
    return 0.0;
}

ShiftField::ShiftField(double horizon, std::vector<ShiftMode> modes)
    : horizon_(horizon), modes_(std::move(modes)) {
    if (!(horizon > 0.0)) throw DomainError("ShiftField: horizon must be positive");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i].n == 0) throw DomainError("ShiftField: mode indices start at 1");
        for (std::size_t j = 0; j < i; ++j) {
            if (modes_[j].n == modes_[i].n) throw DomainError("ShiftField: duplicate mode index");
        }
    }
}

double ShiftField::mode(std::size_t n, double s) const {
    for (const auto& m : modes_) {
        if (m.n == n) return m.tau(s);
    }
    return 0.0;
}

double ShiftField::operator()(double s, double y) const {
    check_position(y, "ShiftField");
    double acc = 0.0;
    for (const auto& m : modes_) {
        acc += m.tau(s) * sqrt2 * std::sin(pi * static_cast<double>(m.n) * y);
    }
    return acc;
}

double ShiftField::squared_norm() const {
    double acc = 0.0;
    for (const auto& m : modes_) {
        acc += adaptive_gauss_legendre([&](double s) { return m.tau(s) * m.tau(s); }, 0.0, horizon_,
                                       1e-13);
    }
    return acc;
}

double mean_mode(double lambda, const Envelope& tau, double t) {
    if (t == 0.0) return 0.0;
    return adaptive_gauss_legendre(
        [&](double s) { return std::exp(-lambda * (t - s)) * tau(s); }, 0.0, t, 1e-13);
}

MeanBundle mean_bundle(const EigenSystem& basis, double t, double x, const ShiftField& f,
                       double epsilon) {
    check_position(x, "mean_bundle");
    check_nonnegative(t, "mean_bundle", "t");
    check_nonnegative(epsilon, "mean_bundle", "epsilon");
    MeanBundle out;
    if (f.is_zero()) return out;
    if (t > f.horizon()) {
        throw HorizonError("mean_bundle: t = " + std::to_string(t) + " beyond horizon " +
                           std::to_string(f.horizon()));
    }
    double f_eps = 0.0;
    for (const auto& m : f.modes()) {
        if (m.n > basis.n_modes()) {
            throw DomainError("mean_bundle: shift mode " + std::to_string(m.n) +
                              " exceeds the basis truncation");
        }
        const double lam = basis.lambda(m.n);
        const double damp = std::exp(-lam * epsilon);
        const double amp = damp * mean_mode(lam, m.tau, t);
        const double en = basis.e(m.n, x);
        out.m += amp * en;
        out.m_dxx += -basis.mu(m.n) * amp * en;
        f_eps += damp * m.tau(t) * en;
    }
    out.m_rate = f_eps + basis.kappa() * out.m_dxx;
    return out;
}

// ---------------------------------------------------------------------------

ModalGrid::ModalGrid(const EigenSystem& basis, std::span<const double> points)
    : n_modes_(basis.n_modes()), points_(points.begin(), points.end()) {
    const std::size_t J = points_.size();
    e_.resize(n_modes_ * J);
    de_.resize(n_modes_ * J);
    e2_.resize(n_modes_ * J);
    for (std::size_t n = 1; n <= n_modes_; ++n) {
        for (std::size_t j = 0; j < J; ++j) {
            check_position(points_[j], "ModalGrid");
            const double v = basis.e(n, points_[j]);
            e_[(n - 1) * J + j] = v;
            de_[(n - 1) * J + j] = basis.de(n, points_[j]);
            e2_[(n - 1) * J + j] = v * v;
        }
    }
}

namespace {

void accumulate(const std::vector<double>& table, std::size_t n_modes, std::span<const double> coeff,
                std::span<double> out) {
    const std::size_t J = out.size();
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n_used = std::min(n_modes, coeff.size());
    for (std::size_t n = n_used; n >= 1; --n) {
        const double c = coeff[n - 1];
        if (c == 0.0) continue;
        const double* row = table.data() + (n - 1) * J;
        for (std::size_t j = 0; j < J; ++j) out[j] += c * row[j];
    }
}

}  // namespace

void ModalGrid::synthesize(std::span<const double> coeff, std::span<double> out) const {
    accumulate(e_, n_modes_, coeff, out);
}

void ModalGrid::synthesize_dx(std::span<const double> coeff, std::span<double> out) const {
    accumulate(de_, n_modes_, coeff, out);
}

void ModalGrid::synthesize_squared(std::span<const double> coeff, std::span<double> out) const {
    accumulate(e2_, n_modes_, coeff, out);
}

void ModalGrid::project(std::span<const double> weighted_values, std::span<double> out) const {
    const std::size_t J = points_.size();
    const std::size_t n_used = std::min(n_modes_, out.size());
    for (std::size_t n = 1; n <= n_used; ++n) {
        const double* row = e_.data() + (n - 1) * J;
        double acc = 0.0;
        for (std::size_t j = 0; j < J; ++j) acc += row[j] * weighted_values[j];
        out[n - 1] = acc;
    }
}

}  // namespace spdeito
