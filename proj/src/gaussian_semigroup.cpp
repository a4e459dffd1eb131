#include "spdeito/gaussian_semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdeito/errors.hpp"

namespace spdeito {

namespace {

Jet linear_jet(double u) { return {u, 1.0, 0.0}; }

Jet quadratic_jet(double u) { return {u * u, 2.0 * u, 2.0}; }

Jet cosine_jet(double u) {
    const double c = std::cos(u);
    return {c, -std::sin(u), -c};
}

Jet tanh_jet(double u) {
    const double th = std::tanh(u);
    const double sech2 = 1.0 - th * th;
    return {th, sech2, -2.0 * th * sech2};
}

Jet logistic_jet(double u) {
    // sigma(u) = 1 / (1 + e^{-u}); sigma' = sigma (1 - sigma); sigma'' = sigma' (1 - 2 sigma).
    const double s = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
    const double d1 = s * (1.0 - s);
    return {s, d1, d1 * (1.0 - 2.0 * s)};
}

}  // namespace

ObservableTriple registry(std::string_view name) {
    if (name == "linear") return {"linear", &linear_jet, false};
    if (name == "quadratic") return {"quadratic", &quadratic_jet, false};
    if (name == "cosine") return {"cosine", &cosine_jet, true};
    if (name == "tanh") return {"tanh", &tanh_jet, true};
    if (name == "logistic") return {"logistic", &logistic_jet, true};
    throw UnknownNameError("unknown observable '" + std::string(name) + "'");
}

std::vector<std::string> observable_names() {
    return {"linear", "quadratic", "cosine", "tanh", "logistic"};
}

HeatSemigroup::HeatSemigroup(std::size_t order) {
    if (order < 2) throw ResolutionError("HeatSemigroup: Gauss-Hermite order must be >= 2");
    const QuadratureRule& rule = gauss_hermite(order);
    nodes_.resize(order);
    weights_.resize(order);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < order; ++i) {
        nodes_[i] = std::numbers::sqrt2 * rule.nodes[i];
        weights_[i] = rule.weights[i] * inv_sqrt_pi;
    }
}

double HeatSemigroup::apply(const ObservableTriple& obs, int k, double v, double z) const {
    if (k < 0 || k > 2) throw DomainError("semigroup_apply: derivative order must be 0, 1 or 2");
    if (!(v >= 0.0)) throw DomainError("semigroup_apply: variance must be >= 0");
    if (v == 0.0) return obs.derivative(k, z);
    const double sd = std::sqrt(v);
    const auto kk = static_cast<std::size_t>(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * obs.jet(z + sd * nodes_[i])[kk];
    return acc;
}

Jet HeatSemigroup::apply_jet(const ObservableTriple& obs, double v, double z) const {
    if (!(v >= 0.0)) throw DomainError("semigroup_apply: variance must be >= 0");
    if (v == 0.0) return obs.jet(z);
    const double sd = std::sqrt(v);
    Jet acc{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Jet j = obs.jet(z + sd * nodes_[i]);
        acc[0] += weights_[i] * j[0];
        acc[1] += weights_[i] * j[1];
        acc[2] += weights_[i] * j[2];
    }
    return acc;
}

double semigroup_apply(const ObservableTriple& obs, int k, double v, double z, std::size_t order) {
    if (order < 2) throw ResolutionError("semigroup_apply: Gauss-Hermite order must be >= 2");
    return HeatSemigroup(order).apply(obs, k, v, z);
}

std::size_t select_hermite_order(const ObservableTriple& obs, double max_variance, double z_min,
                                 double z_max, std::size_t order, double rel_tol,
                                 std::size_t max_order) {
    constexpr int n_var = 5;
    constexpr int n_z = 9;
    while (true) {
        const HeatSemigroup lo(order);
        const HeatSemigroup hi(2 * order);
        bool agree = true;
        for (int a = 1; a <= n_var && agree; ++a) {
            const double v = max_variance * a / n_var;
            for (int b = 0; b < n_z && agree; ++b) {
                const double z = z_min + (z_max - z_min) * b / (n_z - 1);
                const Jet p = lo.apply_jet(obs, v, z);
                const Jet q = hi.apply_jet(obs, v, z);
                for (std::size_t k = 0; k < 3; ++k) {
                    if (std::abs(p[k] - q[k]) > rel_tol * std::max(std::abs(q[k]), 1.0)) agree = false;
                }
            }
        }
        if (agree) return order;
        if (2 * order > max_order) {
            throw ResolutionError("select_hermite_order: no agreement up to order " +
                                  std::to_string(max_order) + " for '" + obs.name + "'");
        }
        order *= 2;
    }
}

}  // namespace spdeito
