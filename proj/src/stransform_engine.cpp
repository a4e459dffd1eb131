#include "spdeito/stransform_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdeito/errors.hpp"
#include "spdeito/quadrature.hpp"

namespace spdeito {

// ---------------------------------------------------------------------------
// Windows

SpaceWindow smooth_bump(std::string name, double center, double half_width) {
    if (!(half_width > 0.0) || center - half_width < 0.0 || center + half_width > 1.0) {
        throw DomainError("smooth_bump: support must lie inside [0, 1]");
    }
    auto l = [center, half_width](double x) {
        const double r = (x - center) / half_width;
        if (std::abs(r) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - r * r));
    };
    // psi'' = psi (6 r^4 - 2) / (1 - r^2)^4 for psi = exp(-1/(1 - r^2)).
    auto l2 = [center, half_width](double x) {
        const double r = (x - center) / half_width;
        if (std::abs(r) >= 1.0) return 0.0;
        const double q = 1.0 - r * r;
        const double psi = std::exp(1.0 - 1.0 / q);
        return psi * (6.0 * r * r * r * r - 2.0) / (q * q * q * q) / (half_width * half_width);
    };
    return {std::move(name), l, l2};
}

SpaceWindow window_registry(std::string_view name) {
    if (name == "poly_bump") {
        // 16 x^2 (1 - x)^2
        return {"poly_bump",
                [](double x) { return 16.0 * x * x * (1.0 - x) * (1.0 - x); },
                [](double x) { return 16.0 * (2.0 - 12.0 * x + 12.0 * x * x); }};
    }
    if (name == "skewed_bump") {
        // x^2 (1 - x)^3 normalized to peak 1 at x = 2/5.
        constexpr double c = 3125.0 / 108.0;
        return {"skewed_bump",
                [](double x) { return c * x * x * (1.0 - x) * (1.0 - x) * (1.0 - x); },
                [](double x) { return c * (2.0 - 18.0 * x + 36.0 * x * x - 20.0 * x * x * x); }};
    }
    if (name == "smooth_bump") return smooth_bump("smooth_bump", 0.5, 0.4);
    if (name == "offset_bump") return smooth_bump("offset_bump", 0.35, 0.25);
    throw UnknownNameError("unknown window '" + std::string(name) + "'");
}

std::vector<std::string> window_names() {
    return {"poly_bump", "skewed_bump", "smooth_bump", "offset_bump"};
}

// ---------------------------------------------------------------------------
// Engine

namespace {

QuadratureRule checked_space_rule(std::size_t points) {
    if (points < 2) throw ResolutionError("StransformEngine: need at least 2 Legendre points");
    return gauss_legendre(points, 0.0, 1.0);
}

}  // namespace

StransformEngine::StransformEngine(EigenSystem basis, EngineOptions options)
    : basis_(basis),
      options_(options),
      semigroup_(options.hermite_order),
      x_nodes_(checked_space_rule(options.legendre_points).nodes),
      x_weights_(checked_space_rule(options.legendre_points).weights),
      grid_(basis_, x_nodes_) {
    if (options_.stieltjes_panels < 1 || options_.panel_points < 1) {
        throw ResolutionError("StransformEngine: time mesh needs at least one panel and point");
    }
    if (!(options_.epsilon >= 0.0)) throw DomainError("StransformEngine: epsilon must be >= 0");
}

void StransformEngine::check_time(double t, const ShiftField& f, const char* what) const {
    if (!(t >= 0.0)) throw DomainError(std::string(what) + ": t must be >= 0");
    if (t > f.horizon()) {
        throw HorizonError(std::string(what) + ": t = " + std::to_string(t) + " beyond horizon " +
                           std::to_string(f.horizon()));
    }
    for (const auto& m : f.modes()) {
        if (m.n > basis_.n_modes()) {
            throw DomainError(std::string(what) + ": shift mode " + std::to_string(m.n) +
                              " exceeds the basis truncation");
        }
    }
}

namespace {

// Spectral state of the Gaussian field on the spatial grid at one time.
struct SliceWork {
    std::vector<double> coeff;
    std::vector<double> shift_coeff;
    std::vector<double> variance;
    std::vector<double> rate;
    std::vector<double> mean;
    std::vector<double> mean_dxx;
    std::vector<double> forcing;
};

std::size_t max_shift_mode(const ShiftField& f) {
    std::size_t top = 0;
    for (const auto& m : f.modes()) top = std::max(top, m.n);
    return top;
}

void fill_variance(const EigenSystem& basis, const ModalGrid& grid, double v, double eps,
                   SliceWork& w) {
    w.coeff.resize(basis.n_modes());
    for (std::size_t n = 1; n <= basis.n_modes(); ++n) {
        w.coeff[n - 1] = mode_coeff::sigma2(basis.lambda(n), v, eps);
    }
    w.variance.resize(grid.n_points());
    grid.synthesize_squared(w.coeff, w.variance);
}

void fill_rate(const EigenSystem& basis, const ModalGrid& grid, double v, double eps, SliceWork& w) {
    w.coeff.resize(basis.n_modes());
    for (std::size_t n = 1; n <= basis.n_modes(); ++n) {
        w.coeff[n - 1] = mode_coeff::sigma2_rate(basis.lambda(n), v, eps);
    }
    w.rate.resize(grid.n_points());
    grid.synthesize_squared(w.coeff, w.rate);
}

void fill_mean(const EigenSystem& basis, const ModalGrid& grid, const ShiftField& f, double v,
               double eps, bool with_derivatives, SliceWork& w) {
    const std::size_t J = grid.n_points();
    w.mean.assign(J, 0.0);
    if (f.is_zero()) {
        w.mean_dxx.assign(J, 0.0);
        w.forcing.assign(J, 0.0);
        return;
    }
    const std::size_t top = max_shift_mode(f);
    w.coeff.assign(top, 0.0);
    w.shift_coeff.assign(top, 0.0);
    for (const auto& m : f.modes()) {
        const double lam = basis.lambda(m.n);
        const double damp = std::exp(-lam * eps);
        w.coeff[m.n - 1] = damp * mean_mode(lam, m.tau, v);
        w.shift_coeff[m.n - 1] = damp * m.tau(v);
    }
    grid.synthesize(w.coeff, w.mean);
    if (!with_derivatives) return;
    w.forcing.resize(J);
    grid.synthesize(w.shift_coeff, w.forcing);
    for (std::size_t n = 1; n <= top; ++n) w.coeff[n - 1] *= -basis.mu(n);
    w.mean_dxx.resize(J);
    grid.synthesize(w.coeff, w.mean_dxx);
}

}  // namespace

std::vector<double> StransformEngine::lhs_at(double t, const ObservableTriple& obs,
                                             const std::vector<std::vector<double>>& lw,
                                             const ShiftField& f) const {
    SliceWork w;
    fill_variance(basis_, grid_, t, options_.epsilon, w);
    fill_mean(basis_, grid_, f, t, options_.epsilon, false, w);
    std::vector<CompensatedSum> acc(lw.size());
    for (std::size_t j = 0; j < x_nodes_.size(); ++j) {
        const double p = semigroup_.apply(obs, 0, w.variance[j], w.mean[j]);
        for (std::size_t q = 0; q < lw.size(); ++q) acc[q].add(lw[q][j] * p);
    }
    std::vector<double> out(lw.size());
    for (std::size_t q = 0; q < lw.size(); ++q) out[q] = acc[q].value();
    return out;
}

std::vector<std::vector<double>> StransformEngine::window_weights(std::span<const SpaceWindow> windows) const {
    std::vector<std::vector<double>> lw(windows.size(), std::vector<double>(x_nodes_.size()));
    for (std::size_t q = 0; q < windows.size(); ++q) {
        for (std::size_t j = 0; j < x_nodes_.size(); ++j) lw[q][j] = x_weights_[j] * windows[q].l(x_nodes_[j]);
    }
    return lw;
}

std::vector<StransformEngine::RhsTerms> StransformEngine::integrate_rhs(
    double t0, double t1, std::size_t panels, const ObservableTriple& obs,
    const std::vector<std::vector<double>>& lw, const ShiftField& f) const {
    const std::size_t nw = lw.size();
    std::vector<RhsTerms> out(nw);
    if (t1 <= t0) return out;
    const QuadratureRule time_rule = t0 == 0.0
                                         ? graded_rule(t1, panels, options_.panel_points)
                                         : composite_rule(t0, t1, panels, options_.panel_points);
    const std::size_t J = x_nodes_.size();
    std::vector<char> active(J, 0);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t q = 0; q < nw; ++q) active[j] |= lw[q][j] != 0.0;
    }

    const double kappa = basis_.kappa();
    std::vector<CompensatedSum> ito(nw), drift(nw), corr(nw);
    std::vector<double> s_ito(nw), s_drift(nw), s_corr(nw);
    SliceWork w;
    for (std::size_t i = 0; i < time_rule.size(); ++i) {
        const double v = time_rule.nodes[i];
        const double wv = time_rule.weights[i];
        fill_variance(basis_, grid_, v, options_.epsilon, w);
        fill_rate(basis_, grid_, v, options_.epsilon, w);
        fill_mean(basis_, grid_, f, v, options_.epsilon, true, w);
        std::fill(s_ito.begin(), s_ito.end(), 0.0);
        std::fill(s_drift.begin(), s_drift.end(), 0.0);
        std::fill(s_corr.begin(), s_corr.end(), 0.0);
        for (std::size_t j = 0; j < J; ++j) {
            if (!active[j]) continue;
            const Jet p = semigroup_.apply_jet(obs, w.variance[j], w.mean[j]);
            const double a = p[1] * w.forcing[j];
            const double d = p[1] * w.mean_dxx[j];
            const double r = p[2] * w.rate[j];
            for (std::size_t q = 0; q < nw; ++q) {
                s_ito[q] += lw[q][j] * a;
                s_drift[q] += lw[q][j] * d;
                s_corr[q] += lw[q][j] * r;
            }
        }
        for (std::size_t q = 0; q < nw; ++q) {
            ito[q].add(wv * s_ito[q]);
            drift[q].add(wv * kappa * s_drift[q]);
            corr[q].add(wv * 0.5 * s_corr[q]);
        }
    }
    for (std::size_t q = 0; q < nw; ++q) {
        out[q].ito_integral = ito[q].value();
        out[q].wick_drift = drift[q].value();
        out[q].ito_correction = corr[q].value();
    }
    return out;
}

double StransformEngine::lhs_term(double t, const ObservableTriple& obs, const SpaceWindow& l,
                                  const ShiftField& f) const {
    check_time(t, f, "lhs_term");
    return lhs_at(t, obs, window_weights({&l, 1}), f).front();
}

double StransformEngine::ito_integral_term(double t, const ObservableTriple& obs,
                                           const SpaceWindow& l, const ShiftField& f) const {
    check_time(t, f, "ito_integral_term");
    if (f.is_zero()) return 0.0;
    return integrate_rhs(0.0, t, options_.stieltjes_panels, obs, window_weights({&l, 1}), f).front().ito_integral;
}

double StransformEngine::wick_drift_term(double t, const ObservableTriple& obs,
                                         const SpaceWindow& l, const ShiftField& f) const {
    check_time(t, f, "wick_drift_term");
    if (f.is_zero()) return 0.0;
    return integrate_rhs(0.0, t, options_.stieltjes_panels, obs, window_weights({&l, 1}), f).front().wick_drift;
}

double StransformEngine::ito_correction_term(double t, const ObservableTriple& obs,
                                             const SpaceWindow& l, const ShiftField& f) const {
    check_time(t, f, "ito_correction_term");
    if (t == 0.0) throw DomainError("ito_correction_term: t must be > 0");
    return integrate_rhs(0.0, t, options_.stieltjes_panels, obs, window_weights({&l, 1}), f).front().ito_correction;
}

TermBreakdown StransformEngine::residual(double t, const ObservableTriple& obs,
                                         const SpaceWindow& l, const ShiftField& f) const {
    return residual_between(0.0, t, obs, l, f);
}

TermBreakdown StransformEngine::residual_between(double t0, double t1, const ObservableTriple& obs,
                                                 const SpaceWindow& l, const ShiftField& f) const {
    return residual_windows(t0, t1, obs, {&l, 1}, f).front();
}

std::vector<TermBreakdown> StransformEngine::residual_windows(double t0, double t1, const ObservableTriple& obs,
                                                             std::span<const SpaceWindow> windows,
                                                             const ShiftField& f) const {
    check_time(t0, f, "residual");
    check_time(t1, f, "residual");
    if (t1 < t0) throw DomainError("residual: t1 must be >= t0");
    const auto lw = window_weights(windows);
    const std::size_t nw = windows.size();
    const auto lhs = lhs_at(t1, obs, lw, f);
    std::vector<double> init(nw);
    if (t0 == 0.0) {
        // sigma^2 = m = 0 at the origin; <phi(u_0), l> = phi(0) int l.
        for (std::size_t q = 0; q < nw; ++q) {
            CompensatedSum mass;
            for (std::size_t j = 0; j < x_nodes_.size(); ++j) mass.add(lw[q][j]);
            init[q] = obs.phi(0.0) * mass.value();
        }
    } else {
        init = lhs_at(t0, obs, lw, f);
    }
    const auto rhs = integrate_rhs(t0, t1, options_.stieltjes_panels, obs, lw, f);
    std::vector<RhsTerms> fine;
    if (options_.check_refinement && t1 > t0) {
        fine = integrate_rhs(t0, t1, 2 * options_.stieltjes_panels, obs, lw, f);
    }
    std::vector<TermBreakdown> out(nw);
    for (std::size_t q = 0; q < nw; ++q) {
        TermBreakdown& b = out[q];
        b.t0 = t0;
        b.t = t1;
        b.quadrature = {options_.hermite_order, options_.legendre_points, options_.stieltjes_panels,
                        options_.panel_points, 2.0, options_.epsilon, false, 0.0};
        b.lhs = lhs[q];
        b.init = init[q];
        b.ito_integral = rhs[q].ito_integral;
        b.wick_drift = rhs[q].wick_drift;
        b.ito_correction = rhs[q].ito_correction;
        b.residual = b.lhs - (b.init + b.ito_integral + b.wick_drift + b.ito_correction);
        b.scale = std::max({std::abs(b.lhs), std::abs(b.init), std::abs(b.ito_integral),
                            std::abs(b.wick_drift), std::abs(b.ito_correction)});
        if (!fine.empty()) {
            const double denom = std::max({std::abs(fine[q].ito_correction), 1e-12 * b.scale, 1e-300});
            b.quadrature.mesh_change = std::abs(fine[q].ito_correction - b.ito_correction) / denom;
            b.quadrature.mesh_warning = b.quadrature.mesh_change > options_.refinement_tol;
        }
    }
    return out;
}

}  // namespace spdeito
