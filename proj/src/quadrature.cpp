#include "spdeito/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace spdeito {

namespace {

QuadratureRule make_reference_legendre(std::size_t n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
            }
            pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z_prev = z;
            z = z_prev - p1 / pp;
            if (std::abs(z - z_prev) <= 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

QuadratureRule make_hermite(std::size_t n) {
    // Jacobi-matrix eigenvalues as starting points, then Newton on the
    // orthonormal recurrence so small weights keep relative accuracy.
    constexpr double pim4 = 0.7511255444649425;  // pi^{-1/4}
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
    for (Eigen::Index j = 0; j < sub.size(); ++j) sub[j] = std::sqrt(0.5 * static_cast<double>(j + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& guesses = solver.eigenvalues();

    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const double nd = static_cast<double>(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Largest root first.
        double z = guesses[static_cast<Eigen::Index>(n - 1 - i)];
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
            }
            pp = std::sqrt(2.0 * nd) * p2;
            const double z_prev = z;
            z = z_prev - p1 / pp;
            if (std::abs(z - z_prev) <= 1e-14 * std::max(1.0, std::abs(z))) break;
        }
        if (n % 2 == 1 && i == half - 1) z = 0.0;
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    // Ascending order.
    for (std::size_t i = 0; i < n / 2; ++i) {
        std::swap(rule.nodes[i], rule.nodes[n - 1 - i]);
        std::swap(rule.weights[i], rule.weights[n - 1 - i]);
    }
    return rule;
}

std::mutex g_cache_mutex;

const QuadratureRule& cached_legendre(std::size_t n) {
    static std::map<std::size_t, QuadratureRule> cache;
    std::lock_guard lock(g_cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_reference_legendre(n)).first;
    return it->second;
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t order, double a, double b) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    const QuadratureRule& ref = cached_legendre(order);
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t i = 0; i < order; ++i) {
        rule.nodes[i] = mid + half * ref.nodes[i];
        rule.weights[i] = half * ref.weights[i];
    }
    return rule;
}

const QuadratureRule& gauss_hermite(std::size_t order) {
    if (order < 2) throw std::invalid_argument("gauss_hermite: order must be >= 2");
    static std::map<std::size_t, QuadratureRule> cache;
    std::lock_guard lock(g_cache_mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_hermite(order)).first;
    return it->second;
}

QuadratureRule graded_rule(double t, std::size_t panels, std::size_t points_per_panel) {
    if (panels < 1) throw std::invalid_argument("graded_rule: need at least one panel");
    QuadratureRule rule;
    rule.nodes.reserve(panels * points_per_panel);
    rule.weights.reserve(panels * points_per_panel);
    const double width = 1.0 / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
        const QuadratureRule panel = gauss_legendre(points_per_panel, k * width, (k + 1) * width);
        for (std::size_t i = 0; i < panel.size(); ++i) {
            const double r = panel.nodes[i];
            rule.nodes.push_back(t * r * r);
            rule.weights.push_back(panel.weights[i] * 2.0 * t * r);
        }
    }
    return rule;
}

QuadratureRule composite_rule(double a, double b, std::size_t panels, std::size_t points_per_panel) {
    if (panels < 1) throw std::invalid_argument("composite_rule: need at least one panel");
    QuadratureRule rule;
    rule.nodes.reserve(panels * points_per_panel);
    rule.weights.reserve(panels * points_per_panel);
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
        const QuadratureRule panel =
            gauss_legendre(points_per_panel, a + k * width, a + (k + 1) * width);
        rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
        rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
    }
    return rule;
}

namespace {

double panel_value(const std::function<double(double)>& f, const QuadratureRule& ref, double a,
                   double b, double* l1 = nullptr) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double acc = 0.0;
    double abs_acc = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double term = ref.weights[i] * f(mid + half * ref.nodes[i]);
        acc += term;
        abs_acc += std::abs(term);
    }
    if (l1 != nullptr) *l1 = std::abs(half) * abs_acc;
    return half * acc;
}

// The tolerance is split between the two halves so that the accepted error
// summed over all panels stays below the global target.
double adapt(const std::function<double(double)>& f, const QuadratureRule& ref, double a, double b,
             double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = panel_value(f, ref, a, mid);
    const double right = panel_value(f, ref, mid, b);
    const double refined = left + right;
    if (depth <= 0 || std::abs(refined - whole) <= tol) return refined;
    return adapt(f, ref, a, mid, left, 0.5 * tol, depth - 1) +
           adapt(f, ref, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                               double rel_tol, double abs_tol, int max_depth) {
    if (b == a) return 0.0;
    const QuadratureRule& ref = cached_legendre(16);
    double l1 = 0.0;
    const double whole = panel_value(f, ref, a, b, &l1);
    const double tol = std::max(abs_tol, rel_tol * l1);
    return adapt(f, ref, a, b, whole, tol, max_depth);
}

void CompensatedSum::add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
        compensation_ += (sum_ - t) + value;
    } else {
        compensation_ += (value - t) + sum_;
    }
    sum_ = t;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace spdeito
