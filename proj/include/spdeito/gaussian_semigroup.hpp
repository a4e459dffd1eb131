#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdeito/quadrature.hpp"

namespace spdeito {

/// (phi, phi', phi'') at one point.
using Jet = std::array<double, 3>;

/// A test observable with analytically coded first and second derivatives.
struct ObservableTriple {
    std::string name;
    Jet (*jet)(double u) = nullptr;
    /// Whether phi belongs to C_b^2 (bounded together with its first two derivatives).
    bool bounded = false;

    double phi(double u) const { return jet(u)[0]; }
    double phi1(double u) const { return jet(u)[1]; }
    double phi2(double u) const { return jet(u)[2]; }
    double derivative(int k, double u) const { return jet(u)[static_cast<std::size_t>(k)]; }
};

/// Registered names: linear, quadratic, cosine, tanh, logistic.
ObservableTriple registry(std::string_view name);
std::vector<std::string> observable_names();

/// One-dimensional heat semigroup (P_v phi)(z) = E[phi(z + sqrt(v) Z)], Z ~ N(0, 1),
/// evaluated by Gauss-Hermite quadrature of fixed order.
class HeatSemigroup {
public:
    explicit HeatSemigroup(std::size_t order = 64);

    std::size_t order() const { return nodes_.size(); }

    /// E[phi^{(k)}(z + sqrt(v) Z)] for k in {0, 1, 2}; v = 0 returns phi^{(k)}(z) exactly.
    double apply(const ObservableTriple& obs, int k, double v, double z) const;
    /// All three derivative orders from one pass over the nodes.
    Jet apply_jet(const ObservableTriple& obs, double v, double z) const;

private:
    std::vector<double> nodes_;    // sqrt(2) x_i
    std::vector<double> weights_;  // w_i / sqrt(pi)
};

/// Stateless form with a per-call order (rules are cached).
double semigroup_apply(const ObservableTriple& obs, int k, double v, double z,
                       std::size_t order = 64);

/// Richardson order selection: starting from `order`, double until the
/// semigroup jets at `order` and `2 order` agree to `rel_tol` (relative to
/// max(|value|, 1)) on all probes
/// (variance in [0, max_variance], points in [z_min, z_max]), up to `max_order`.
/// Throws ResolutionError if `max_order` is reached without agreement.
std::size_t select_hermite_order(const ObservableTriple& obs, double max_variance, double z_min,
                                 double z_max, std::size_t order = 64, double rel_tol = 1e-10,
                                 std::size_t max_order = 512);

}  // namespace spdeito
