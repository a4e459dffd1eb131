#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "spdeito/spectral_kernel.hpp"

namespace spdeito {

/// Time-direction multiplier nu_k of the periodic operator A on [0, T].
struct MultiplierConvention {
    enum class Kind {
        /// nu_k = max(2 pi k / T, floor).
        floored,
        /// nu_k = 1 for every k.
        unit,
    };

    Kind kind = Kind::floored;
    double floor = 1.0;
    /// A^{-p} acts on amplitudes, so squared coefficients are scaled by nu_k^{-2p}.
    int order = 2;

    static MultiplierConvention floored_default() { return {}; }
    static MultiplierConvention unit_multiplier() { return {Kind::unit, 1.0, 2}; }

    /// nu_k for frequency index k >= 0 (negative k uses |k|).
    double nu(long k, double horizon) const;
    std::string name() const;
};

MultiplierConvention parse_convention(std::string_view name);

struct HidaNorm {
    double t = 0.0;
    double x = 0.0;
    /// Squared norm E|Gamma(A^{-p}) d_xx u_t(x)|^2.
    double norm = 0.0;
    /// int_0^t int_0^1 g_{t-s}(x, y)^2 dy ds = sigma2(t, x, 0).
    double upper_bound = 0.0;
    double ratio = 0.0;
    /// Bound on the discarded frequencies |k| >= resolution (exact remainder for unit).
    double tail_bound = 0.0;
    std::size_t resolution = 0;
    std::string convention;
};

/// Coefficient of g_{t-s}(x, .) in mode n after A_y^{-2} acts on d_xx g: d_xx coefficient / (-mu(n)).
double spatial_reduce(const EigenSystem& basis, std::size_t n, double dxx_coefficient);

/// |c_k|^2 for s -> exp(-lambda (t - s)) 1_[0,t](s) in the orthonormal periodic basis on [0, T].
double time_coefficient_sq(double lambda, double t, double horizon, long k);
/// sum over all k in Z of time_coefficient_sq, by the closed-form lattice sum.
double time_coefficient_total(double lambda, double t, double horizon);

/// Negative-order Hida norm of d_xx u_t(x); retains frequencies |k| < resolution.
///
/// Throws ResolutionError when the discarded frequencies may exceed 1e-10 of the norm.
HidaNorm hida_norm_dxx(double t, double x, const MultiplierConvention& convention,
                       const EigenSystem& basis, double horizon, std::size_t resolution = 4096);

}  // namespace spdeito
