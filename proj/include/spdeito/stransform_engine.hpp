#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spdeito/gaussian_semigroup.hpp"
#include "spdeito/spectral_kernel.hpp"

namespace spdeito {

/// Spatial test function l with l(0) = l(1) = l'(0) = l'(1) = 0, and its second derivative.
struct SpaceWindow {
    std::string name;
    std::function<double(double)> l;
    std::function<double(double)> l2;
};

/// Registered names: poly_bump, skewed_bump, smooth_bump, offset_bump.
SpaceWindow window_registry(std::string_view name);
std::vector<std::string> window_names();

/// C-infinity bump exp(1 - 1/(1 - r^2)), r = (x - center) / half_width, peak value 1.
SpaceWindow smooth_bump(std::string name, double center, double half_width);

struct EngineOptions {
    std::size_t hermite_order = 64;
    std::size_t legendre_points = 512;
    /// Panels K of the graded mesh s_k = t (k/K)^2.
    std::size_t stieltjes_panels = 256;
    std::size_t panel_points = 4;
    /// Regularization: all kernels are evaluated at g_{t-s+eps}.
    double epsilon = 0.0;
    /// Re-evaluate the Ito correction with 2K panels and flag a mesh warning when the
    /// relative change exceeds `refinement_tol`.
    bool check_refinement = false;
    double refinement_tol = 1e-7;
};

struct QuadratureMeta {
    std::size_t hermite_order = 0;
    std::size_t legendre_points = 0;
    std::size_t stieltjes_panels = 0;
    std::size_t panel_points = 0;
    double grading_exponent = 2.0;
    double epsilon = 0.0;
    bool mesh_warning = false;
    double mesh_change = 0.0;
};

/// Evaluated terms of one instance of the Ito-type identity over [t0, t]:
/// lhs = <E[phi(u_t) E_T(f)], l>, init = the same at t0, and the three right-hand
/// side integrals over [t0, t].
struct TermBreakdown {
    double t0 = 0.0;
    double t = 0.0;
    double lhs = 0.0;
    double init = 0.0;
    double ito_integral = 0.0;
    double wick_drift = 0.0;
    double ito_correction = 0.0;
    double residual = 0.0;
    double scale = 0.0;
    QuadratureMeta quadrature;

    double relative_residual() const { return scale > 0.0 ? std::abs(residual) / scale : 0.0; }
};

/// Deterministic evaluation of the S-transformed terms of the Ito-type formula.
///
/// The S-transform of phi(u_v(x)) at f is (P_{sigma^2(v,x)} phi)(m(v,x)); every
/// term becomes a quadrature in (v, x) of semigroup values. Time integrals from
/// the origin use the graded mesh, which resolves the s^{-1/2} singularity of
/// d sigma^2/ds; spatial integrals use Gauss-Legendre.
class StransformEngine {
public:
    explicit StransformEngine(EigenSystem basis, EngineOptions options = {});

    const EigenSystem& basis() const { return basis_; }
    const EngineOptions& options() const { return options_; }

    double lhs_term(double t, const ObservableTriple& obs, const SpaceWindow& l,
                    const ShiftField& f) const;
    double ito_integral_term(double t, const ObservableTriple& obs, const SpaceWindow& l,
                             const ShiftField& f) const;
    double wick_drift_term(double t, const ObservableTriple& obs, const SpaceWindow& l,
                           const ShiftField& f) const;
    double ito_correction_term(double t, const ObservableTriple& obs, const SpaceWindow& l,
                               const ShiftField& f) const;

    TermBreakdown residual(double t, const ObservableTriple& obs, const SpaceWindow& l,
                           const ShiftField& f) const;
    /// Same identity restarted at t0: init is the left-hand side at t0.
    TermBreakdown residual_between(double t0, double t1, const ObservableTriple& obs,
                                   const SpaceWindow& l, const ShiftField& f) const;
    /// residual_between for several windows in one pass; the semigroup values are shared.
    std::vector<TermBreakdown> residual_windows(double t0, double t1, const ObservableTriple& obs,
                                                std::span<const SpaceWindow> windows,
                                                const ShiftField& f) const;

private:
    struct RhsTerms {
        double ito_integral = 0.0;
        double wick_drift = 0.0;
        double ito_correction = 0.0;
    };

    void check_time(double t, const ShiftField& f, const char* what) const;
    std::vector<std::vector<double>> window_weights(std::span<const SpaceWindow> windows) const;
    std::vector<double> lhs_at(double t, const ObservableTriple& obs,
                               const std::vector<std::vector<double>>& lw, const ShiftField& f) const;
    std::vector<RhsTerms> integrate_rhs(double t0, double t1, std::size_t panels, const ObservableTriple& obs,
                                        const std::vector<std::vector<double>>& lw, const ShiftField& f) const;

    EigenSystem basis_;
    EngineOptions options_;
    HeatSemigroup semigroup_;
    std::vector<double> x_nodes_;
    std::vector<double> x_weights_;
    ModalGrid grid_;
};

}  // namespace spdeito
