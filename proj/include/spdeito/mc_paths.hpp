#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "spdeito/gaussian_semigroup.hpp"
#include "spdeito/spectral_kernel.hpp"
#include "spdeito/stransform_engine.hpp"

namespace spdeito {

enum class Scheme {
    /// Exact Ornstein-Uhlenbeck transition per mode; exact in law at grid points.
    exact_ou,
    /// a[k+1] = exp(-lambda dt) (a[k] + dbeta[k]); keeps the increments dbeta.
    exp_euler,
};

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// Uniform time grid 0 = t_0 < ... < t_K = horizon.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);
    /// Rejects grids that do not start at 0 or are not uniform.
    static TimeGrid from_times(std::span<const double> times);

    double horizon() const { return horizon_; }
    std::size_t steps() const { return steps_; }
    double dt() const { return horizon_ / static_cast<double>(steps_); }
    double time(std::size_t k) const { return horizon_ * static_cast<double>(k) / static_cast<double>(steps_); }

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t steps_;
};

/// Sampled spectral mode trajectory of the solution u_t(x) = sum_n a_n(t) e(n, x).
///
/// Storage is step-major: coeff(n, k) at coeffs[k * n_modes + n - 1].
struct ModePath {
    Scheme scheme = Scheme::exact_ou;
    double epsilon = 0.0;
    TimeGrid grid{1.0, 1};
    std::size_t n_modes = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<double> coeffs;
    std::vector<double> incs;

    bool has_increments() const { return !incs.empty(); }
    double coeff(std::size_t n, std::size_t k) const { return coeffs[k * n_modes + n - 1]; }
    double increment(std::size_t n, std::size_t k) const { return incs[k * n_modes + n - 1]; }
    std::span<const double> coeffs_at(std::size_t k) const {
        return {coeffs.data() + k * n_modes, n_modes};
    }
    std::span<const double> increments_at(std::size_t k) const {
        return {incs.data() + k * n_modes, n_modes};
    }
};

/// Samples all basis modes on `grid`. Draws are keyed by (seed, stream, mode, step),
/// so the path is bit-identical for identical inputs. epsilon only affects field
/// evaluation (factor exp(-lambda eps) per mode), not the mode dynamics.
ModePath sample_path(const EigenSystem& basis, Scheme scheme, const TimeGrid& grid, double epsilon,
                     std::uint64_t seed, std::uint64_t stream);

enum class Deriv { value, dx, dxx };

/// sum_n exp(-lambda_n eps) a_n[k] D e(n, x).
double field(const EigenSystem& basis, const ModePath& path, std::size_t k, double x,
             Deriv deriv = Deriv::value);

/// exp(sum_{n,k} f_n(t_k) dbeta[n][k] - 1/2 sum_{n,k} f_n(t_k)^2 dt).
double stoch_exponential(const ModePath& path, const ShiftField& f);

enum class EstimatorMode { shifted, weighted };

struct SamplerConfig {
    Scheme scheme = Scheme::exact_ou;
    TimeGrid grid{1.0, 1};
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    /// Sample i uses stream stream_base + i.
    std::uint64_t stream_base = 0;
    std::size_t workers = 1;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Read access to a (possibly Girsanov-shifted) sampled field.
class FieldView {
public:
    FieldView(const EigenSystem& basis, const ModePath& path,
              const std::vector<std::vector<double>>* shift_amplitudes,
              const std::vector<std::size_t>* shift_modes)
        : basis_(basis), path_(path), shift_(shift_amplitudes), shift_modes_(shift_modes) {}

    const ModePath& path() const { return path_; }
    double time(std::size_t k) const { return path_.grid.time(k); }
    std::size_t final_step() const { return path_.grid.steps(); }
    double value(std::size_t k, double x, Deriv deriv = Deriv::value) const;

private:
    const EigenSystem& basis_;
    const ModePath& path_;
    const std::vector<std::vector<double>>* shift_;
    const std::vector<std::size_t>* shift_modes_;
};

using PathFunctional = std::function<double(const FieldView&)>;

/// Monte Carlo estimate of the S-transform E[Phi(u) E_T(f)].
///
/// shifted: E[Phi(u + m)] with the deterministic Girsanov mean m from the spectral
/// kernel; weighted: E[Phi(u) E_T(f)] with the stochastic exponential of the path
/// increments (requires exp_euler).
Estimate estimate_stransform(const EigenSystem& basis, const PathFunctional& functional,
                             const ShiftField& f, std::size_t n_samples, EstimatorMode mode,
                             const SamplerConfig& config);
/// Several functionals on the same sample of paths.
std::vector<Estimate> estimate_stransform(const EigenSystem& basis,
                                          std::span<const PathFunctional> functionals,
                                          const ShiftField& f, std::size_t n_samples,
                                          EstimatorMode mode, const SamplerConfig& config);

/// Mean and standard error of a sample, with pairwise summation.
Estimate summarize(std::span<const double> values);

enum class IdentityForm { wick_form, zambotti_form };

/// Pathwise terms of the eps-regularized identity on one path.
///
/// wick_form: drift = kappa sum <phi'(u) . d_xx u, l> dt with the Wick product
/// phi'(u) d_xx u - phi''(u) E[u d_xx u]; correction = 1/2 sum <phi''(u) sigma2_rate, l> dt.
/// zambotti_form: drift = kappa sum <phi(u), l''> dt; correction =
/// -1/2 sum <phi''(u) (2 kappa (d_x u)^2 - counterterm), l> dt.
struct PathwiseTerms {
    double lhs = 0.0;
    double init = 0.0;
    double ito_integral = 0.0;
    double drift = 0.0;
    double correction = 0.0;
    double residual = 0.0;
    double scale = 0.0;
};

/// Pathwise evaluator for a fixed (basis, observable, window, grid, eps).
///
/// Spatial integrals use Gauss-Legendre; time integrals are left-endpoint sums on the
/// path grid. The Ito sum pairs phi'(u_{t_k}) with the increments of the noise that
/// drives u^eps, i.e. exp(-lambda eps) dbeta.
class PathwiseEvaluator {
public:
    PathwiseEvaluator(const EigenSystem& basis, ObservableTriple obs, SpaceWindow l,
                      const TimeGrid& grid, double epsilon, std::size_t legendre_points = 128);

    double ito_integral(const ModePath& path) const;
    PathwiseTerms identity(const ModePath& path, IdentityForm form) const;
    /// Both forms from one pass over the path.
    std::array<PathwiseTerms, 2> both_forms(const ModePath& path) const;

private:
    struct Pass;
    Pass run(const ModePath& path, bool with_identity) const;
    void check_path(const ModePath& path) const;

    EigenSystem basis_;
    ObservableTriple obs_;
    SpaceWindow window_;
    TimeGrid grid_;
    double epsilon_;
    std::vector<double> nodes_;
    std::vector<double> lw_;   // w_j l(x_j)
    std::vector<double> l2w_;  // w_j l''(x_j)
    ModalGrid modal_;
    std::vector<double> damping_;        // exp(-lambda_n eps)
    std::vector<double> counterterm_;    // per node
    std::vector<double> rate_;           // [k][j]
    std::vector<double> wick_;           // [k][j]
};

double pathwise_ito_integral(const EigenSystem& basis, const ModePath& path,
                             const ObservableTriple& obs, const SpaceWindow& l,
                             std::size_t legendre_points = 128);

/// Rejects eps = 0 (the pathwise correction terms diverge).
PathwiseTerms pathwise_identity_residual(const EigenSystem& basis, const ModePath& path,
                                         const ObservableTriple& obs, const SpaceWindow& l,
                                         IdentityForm form, std::size_t legendre_points = 128);

}  // namespace spdeito
