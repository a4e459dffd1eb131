#include "spdeito/hida_norms.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "spdeito/errors.hpp"
#include "spdeito/format.hpp"
#include "spdeito/quadrature.hpp"

namespace spdeito {

namespace {

constexpr double kTailRelTol = 1e-10;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double MultiplierConvention::nu(long k, double horizon) const {
    if (kind == Kind::unit) return 1.0;
    const double freq = kTwoPi * static_cast<double>(std::labs(k)) / horizon;
    return std::max(freq, floor);
}

std::string MultiplierConvention::name() const {
    if (kind == Kind::unit) return "unit";
    return "floored(" + format_double(floor) + ")";
}

MultiplierConvention parse_convention(std::string_view name) {
    if (name == "floored") return MultiplierConvention::floored_default();
    if (name == "unit") return MultiplierConvention::unit_multiplier();
    throw UnknownNameError("unknown multiplier convention: " + std::string(name));
}

double spatial_reduce(const EigenSystem& basis, std::size_t n, double dxx_coefficient) {
    return dxx_coefficient / (-basis.mu(n));
}

double time_coefficient_sq(double lambda, double t, double horizon, long k) {
    const double omega = kTwoPi * static_cast<double>(k) / horizon;
    const double decay = std::exp(-lambda * t);
    const double gap = std::expm1(-lambda * t);
    const double half = std::sin(0.5 * omega * t);
    const double num = gap * gap + 4.0 * decay * half * half;
    return num / (horizon * (lambda * lambda + omega * omega));
}

double time_coefficient_total(double lambda, double t, double horizon) {
    // sum_k 1/(k^2+b^2) = (pi/b) coth(pi b) and
    // sum_k cos(k a)/(k^2+b^2) = (pi/b) cosh(b(pi-a))/sinh(pi b), 0 <= a <= 2 pi.
    const double b = lambda * horizon / kTwoPi;
    const double a = kTwoPi * t / horizon;
    const double q = std::exp(-kTwoPi * b);
    const double decay = std::exp(-lambda * t);
    const double s0 = (1.0 + q) / (1.0 - q);
    const double s1 = (decay + std::exp(-b * (kTwoPi - a))) / (1.0 - q);
    const double bracket = (1.0 + decay * decay) * s0 - 2.0 * decay * s1;
    return horizon / (4.0 * std::numbers::pi * b) * bracket;
}

HidaNorm hida_norm_dxx(double t, double x, const MultiplierConvention& convention,
                       const EigenSystem& basis, double horizon, std::size_t resolution) {
    if (!(horizon > 0.0)) throw DomainError("hida_norm_dxx: horizon must be positive");
    if (!(t > 0.0 && t <= horizon)) throw DomainError("hida_norm_dxx: need 0 < t <= horizon");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("hida_norm_dxx: x must lie in [0, 1]");
    if (resolution < 1) throw DomainError("hida_norm_dxx: resolution must be positive");
    if (!(convention.floor > 0.0) || convention.order < 1) {
        throw DomainError("hida_norm_dxx: multiplier floor must be positive and order >= 1");
    }
    const auto R = static_cast<long>(resolution);
    const int power = 2 * convention.order;

    std::vector<double> weight(resolution);
    for (long k = 0; k < R; ++k) weight[static_cast<std::size_t>(k)] = std::pow(convention.nu(k, horizon), -power);
    const double tail_weight = std::pow(convention.nu(R, horizon), -power);
    const bool exact_tail = convention.kind == MultiplierConvention::Kind::unit;

    CompensatedSum norm, tail;
    for (std::size_t n = basis.n_modes(); n >= 1; --n) {
        const double en = basis.e(n, x);
        // Spatial step on the mode-n coefficient of d_xx g_{t-s}: -mu e^{-lambda(t-s)} e_n(x).
        const double amp = spatial_reduce(basis, n, -basis.mu(n) * en);
        const double lam = basis.lambda(n);
        CompensatedSum inner, plain;
        for (long k = R - 1; k >= 0; --k) {
            const double c = time_coefficient_sq(lam, t, horizon, k) * (k == 0 ? 1.0 : 2.0);
            inner.add(weight[static_cast<std::size_t>(k)] * c);
            plain.add(c);
        }
        const double remainder = std::max(0.0, time_coefficient_total(lam, t, horizon) - plain.value());
        const double mode_tail = tail_weight * remainder * amp * amp;
        norm.add(inner.value() * amp * amp);
        if (exact_tail) norm.add(mode_tail);
        tail.add(mode_tail);
    }

    HidaNorm out;
    out.t = t;
    out.x = x;
    out.norm = norm.value();
    out.upper_bound = sigma2(basis, t, x, 0.0);
    out.ratio = out.upper_bound > 0.0 ? out.norm / out.upper_bound : 0.0;
    out.tail_bound = tail.value();
    out.resolution = resolution;
    out.convention = convention.name();
    if (!exact_tail && out.tail_bound > kTailRelTol * out.norm) {
        throw ResolutionError("hida_norm_dxx: discarded frequencies bounded by " +
                              format_double(out.tail_bound) + ", above 1e-10 of the norm " +
                              format_double(out.norm) + "; increase resolution");
    }
    return out;
}

}  // namespace spdeito
