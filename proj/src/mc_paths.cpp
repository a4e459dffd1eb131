#include "spdeito/mc_paths.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spdeito/counter_rng.hpp"
#include "spdeito/errors.hpp"
#include "spdeito/parallel.hpp"
#include "spdeito/quadrature.hpp"

namespace spdeito {

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::exact_ou: return "exact_ou";
        case Scheme::exp_euler: return "exp_euler";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "exact_ou") return Scheme::exact_ou;
    if (name == "exp_euler") return Scheme::exp_euler;
    throw UnknownNameError("unknown scheme: " + std::string(name));
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("time grid horizon must be positive");
    if (steps == 0) throw DomainError("time grid needs at least one step");
}

TimeGrid TimeGrid::from_times(std::span<const double> times) {
    if (times.size() < 2) throw DomainError("time grid needs at least two points");
    if (times.front() != 0.0) throw DomainError("time grid must start at 0");
    TimeGrid grid(times.back(), times.size() - 1);
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (std::abs(times[k] - grid.time(k)) > 1e-12 * grid.horizon()) {
            throw DomainError("time grid must be uniform");
        }
    }
    return grid;
}

ModePath sample_path(const EigenSystem& basis, Scheme scheme, const TimeGrid& grid, double epsilon,
                     std::uint64_t seed, std::uint64_t stream) {
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
    const std::size_t N = basis.n_modes();
    const std::size_t K = grid.steps();
    const double dt = grid.dt();

    ModePath path;
    path.scheme = scheme;
    path.epsilon = epsilon;
    path.grid = grid;
    path.n_modes = N;
    path.seed = seed;
    path.stream = stream;
    path.coeffs.assign((K + 1) * N, 0.0);
    if (scheme == Scheme::exp_euler) path.incs.assign(K * N, 0.0);

    std::vector<double> decay(N), ou_sd(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const double lam = basis.lambda(n);
        decay[n - 1] = std::exp(-lam * dt);
        ou_sd[n - 1] = std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam));
    }
    const double sqrt_dt = std::sqrt(dt);

    const GaussianStream normals(seed, stream);
    for (std::size_t k = 0; k < K; ++k) {
        const double* a = path.coeffs.data() + k * N;
        double* next = path.coeffs.data() + (k + 1) * N;
        const auto step = static_cast<std::uint32_t>(k);
        for (std::size_t i = 0; i < N; i += 2) {
            const auto z = normals.pair(static_cast<std::uint32_t>(i / 2), step);
            for (std::size_t r = 0; r < 2 && i + r < N; ++r) {
                const std::size_t m = i + r;
                if (scheme == Scheme::exact_ou) {
                    next[m] = decay[m] * a[m] + ou_sd[m] * z[r];
                } else {
                    const double db = sqrt_dt * z[r];
                    path.incs[k * N + m] = db;
                    next[m] = decay[m] * (a[m] + db);
                }
            }
        }
    }
    return path;
}

double field(const EigenSystem& basis, const ModePath& path, std::size_t k, double x, Deriv deriv) {
    if (k > path.grid.steps()) throw DomainError("step index outside the path");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x must lie in [0, 1]");
    CompensatedSum acc;
    for (std::size_t n = path.n_modes; n >= 1; --n) {
        const double c = std::exp(-basis.lambda(n) * path.epsilon) * path.coeff(n, k);
        switch (deriv) {
            case Deriv::value: acc.add(c * basis.e(n, x)); break;
            case Deriv::dx: acc.add(c * basis.de(n, x)); break;
            case Deriv::dxx: acc.add(c * basis.d2e(n, x)); break;
        }
    }
    return acc.value();
}

double stoch_exponential(const ModePath& path, const ShiftField& f) {
    if (!path.has_increments()) {
        throw MissingIncrementsError("stochastic exponential needs a path sampled with exp_euler");
    }
    const std::size_t K = path.grid.steps();
    const double dt = path.grid.dt();
    CompensatedSum exponent;
    for (const auto& mode : f.modes()) {
        if (mode.n > path.n_modes) throw DomainError("shift mode exceeds the path modes");
        for (std::size_t k = 0; k < K; ++k) {
            const double tau = mode.tau(path.grid.time(k));
            exponent.add(tau * path.increment(mode.n, k));
            exponent.add(-0.5 * tau * tau * dt);
        }
    }
    return std::exp(exponent.value());
}

double FieldView::value(std::size_t k, double x, Deriv deriv) const {
    double v = field(basis_, path_, k, x, deriv);
    if (shift_ == nullptr) return v;
    const auto& amps = (*shift_)[k];
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const std::size_t n = (*shift_modes_)[i];
        switch (deriv) {
            case Deriv::value: v += amps[i] * basis_.e(n, x); break;
            case Deriv::dx: v += amps[i] * basis_.de(n, x); break;
            case Deriv::dxx: v += amps[i] * basis_.d2e(n, x); break;
        }
    }
    return v;
}

Estimate summarize(std::span<const double> values) {
    if (values.empty()) throw DomainError("cannot summarize an empty sample");
    Estimate est;
    est.n = values.size();
    est.value = pairwise_sum(values) / static_cast<double>(est.n);
    if (est.n < 2) {
        est.std_error = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - est.value;
        dev[i] = d * d;
    }
    const double var = pairwise_sum(dev) / static_cast<double>(est.n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(est.n));
    return est;
}

std::vector<Estimate> estimate_stransform(const EigenSystem& basis,
                                          std::span<const PathFunctional> functionals,
                                          const ShiftField& f, std::size_t n_samples,
                                          EstimatorMode mode, const SamplerConfig& config) {
    if (n_samples == 0) throw DomainError("n_samples must be positive");
    if (!f.is_zero() && config.grid.horizon() > f.horizon() * (1.0 + 1e-14)) {
        throw HorizonError("sampling horizon exceeds the shift horizon");
    }
    for (const auto& m : f.modes()) {
        if (m.n > basis.n_modes()) throw DomainError("shift mode exceeds the basis size");
    }
    if (mode == EstimatorMode::weighted && config.scheme != Scheme::exp_euler) {
        throw MissingIncrementsError("weighted estimator needs exp_euler increments");
    }

    // Damped Girsanov mean amplitudes on the grid, one entry per shift mode.
    std::vector<std::size_t> shift_modes;
    std::vector<std::vector<double>> shift_amps;
    const bool shifted = mode == EstimatorMode::shifted && !f.is_zero();
    if (shifted) {
        for (const auto& m : f.modes()) shift_modes.push_back(m.n);
        shift_amps.assign(config.grid.steps() + 1, std::vector<double>(shift_modes.size(), 0.0));
        for (std::size_t k = 0; k <= config.grid.steps(); ++k) {
            for (std::size_t i = 0; i < f.modes().size(); ++i) {
                const auto& m = f.modes()[i];
                const double lam = basis.lambda(m.n);
                shift_amps[k][i] = std::exp(-lam * config.epsilon) *
                                   mean_mode(lam, m.tau, config.grid.time(k));
            }
        }
    }

    const std::size_t F = functionals.size();
    std::vector<double> samples(F * n_samples);
    parallel_for(n_samples, config.workers, [&](std::size_t i) {
        const ModePath path = sample_path(basis, config.scheme, config.grid, config.epsilon,
                                          config.seed, config.stream_base + i);
        const FieldView view(basis, path, shifted ? &shift_amps : nullptr,
                             shifted ? &shift_modes : nullptr);
        const double weight =
            mode == EstimatorMode::weighted ? stoch_exponential(path, f) : 1.0;
        for (std::size_t q = 0; q < F; ++q) samples[q * n_samples + i] = functionals[q](view) * weight;
    });

    std::vector<Estimate> out;
    out.reserve(F);
    for (std::size_t q = 0; q < F; ++q) {
        out.push_back(summarize(std::span<const double>(samples.data() + q * n_samples, n_samples)));
    }
    return out;
}

Estimate estimate_stransform(const EigenSystem& basis, const PathFunctional& functional,
                             const ShiftField& f, std::size_t n_samples, EstimatorMode mode,
                             const SamplerConfig& config) {
    return estimate_stransform(basis, std::span<const PathFunctional>(&functional, 1), f, n_samples,
                               mode, config)
        .front();
}

namespace {

std::vector<double> legendre_nodes(std::size_t points) {
    if (points < 2) throw DomainError("need at least two spatial nodes");
    return gauss_legendre(points, 0.0, 1.0).nodes;
}

}  // namespace

struct PathwiseEvaluator::Pass {
    double lhs = 0.0;
    double init = 0.0;
    double ito = 0.0;
    double wick_drift = 0.0;
    double wick_corr = 0.0;
    double zam_drift = 0.0;
    double zam_corr = 0.0;
};

PathwiseEvaluator::PathwiseEvaluator(const EigenSystem& basis, ObservableTriple obs, SpaceWindow l,
                                     const TimeGrid& grid, double epsilon,
                                     std::size_t legendre_points)
    : basis_(basis),
      obs_(std::move(obs)),
      window_(std::move(l)),
      grid_(grid),
      epsilon_(epsilon),
      nodes_(legendre_nodes(legendre_points)),
      modal_(basis, nodes_) {
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
    const auto rule = gauss_legendre(legendre_points, 0.0, 1.0);
    const std::size_t J = nodes_.size();
    const std::size_t N = basis_.n_modes();
    lw_.resize(J);
    l2w_.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        lw_[j] = rule.weights[j] * window_.l(nodes_[j]);
        l2w_[j] = rule.weights[j] * window_.l2(nodes_[j]);
    }
    damping_.resize(N);
    for (std::size_t n = 1; n <= N; ++n) damping_[n - 1] = std::exp(-basis_.lambda(n) * epsilon);

    if (epsilon > 0.0) {
        const std::size_t K = grid_.steps();
        std::vector<double> coeff(N);
        rate_.resize(K * J);
        wick_.resize(K * J);
        for (std::size_t k = 0; k < K; ++k) {
            const double s = grid_.time(k);
            for (std::size_t n = 1; n <= N; ++n) coeff[n - 1] = mode_coeff::sigma2_rate(basis_.lambda(n), s, epsilon);
            modal_.synthesize_squared(coeff, std::span<double>(rate_.data() + k * J, J));
            for (std::size_t n = 1; n <= N; ++n) coeff[n - 1] = mode_coeff::wick_correction(basis_.lambda(n), s, epsilon);
            modal_.synthesize_squared(coeff, std::span<double>(wick_.data() + k * J, J));
        }
        counterterm_.assign(rate_.begin(), rate_.begin() + static_cast<std::ptrdiff_t>(J));
    }
}

void PathwiseEvaluator::check_path(const ModePath& path) const {
    if (!path.has_increments()) {
        throw MissingIncrementsError("pathwise integrals need a path sampled with exp_euler");
    }
    if (path.n_modes != basis_.n_modes()) throw DomainError("path and basis mode counts differ");
    if (!(path.grid == grid_)) throw DomainError("path grid differs from the evaluator grid");
    if (path.epsilon != epsilon_) throw DomainError("path epsilon differs from the evaluator epsilon");
}

PathwiseEvaluator::Pass PathwiseEvaluator::run(const ModePath& path, bool with_identity) const {
    check_path(path);
    const std::size_t N = basis_.n_modes();
    const std::size_t J = nodes_.size();
    const std::size_t K = grid_.steps();
    const double dt = grid_.dt();
    const double kappa = basis_.kappa();

    std::vector<double> b(N), proj(N), u(J), ux(J), weighted(J);
    CompensatedSum ito, wick_drift, wick_corr, zam_drift, zam_corr;

    for (std::size_t k = 0; k < K; ++k) {
        const auto a = path.coeffs_at(k);
        for (std::size_t n = 0; n < N; ++n) b[n] = damping_[n] * a[n];
        modal_.synthesize(b, u);
        if (with_identity) modal_.synthesize_dx(b, ux);

        double wd = 0.0, wc = 0.0, zd = 0.0, zc = 0.0;
        const double* rate = with_identity ? rate_.data() + k * J : nullptr;
        const double* wick = with_identity ? wick_.data() + k * J : nullptr;
        for (std::size_t j = 0; j < J; ++j) {
            const Jet jet = obs_.jet(u[j]);
            weighted[j] = lw_[j] * jet[1];
            if (with_identity) {
                const double c2 = lw_[j] * jet[2];
                wd -= c2 * wick[j];
                wc += 0.5 * c2 * rate[j];
                zc -= 0.5 * c2 * (2.0 * kappa * ux[j] * ux[j] - counterterm_[j]);
                zd += kappa * l2w_[j] * jet[0];
            }
        }
        modal_.project(weighted, proj);

        const auto db = path.increments_at(k);
        double step_ito = 0.0;
        for (std::size_t n = 0; n < N; ++n) step_ito += proj[n] * damping_[n] * db[n];
        ito.add(step_ito);

        if (with_identity) {
            // <phi'(u) d_xx u, l> from the projections: d_xx u = sum -mu b e.
            double lap = 0.0;
            for (std::size_t n = 0; n < N; ++n) lap -= proj[n] * basis_.mu(n + 1) * b[n];
            wick_drift.add((kappa * lap + wd) * dt);
            wick_corr.add(wc * dt);
            zam_drift.add(zd * dt);
            zam_corr.add(zc * dt);
        }
    }

    Pass pass;
    pass.ito = ito.value();
    if (with_identity) {
        const auto aK = path.coeffs_at(K);
        for (std::size_t n = 0; n < N; ++n) b[n] = damping_[n] * aK[n];
        modal_.synthesize(b, u);
        CompensatedSum lhs, init;
        const double phi0 = obs_.phi(0.0);
        for (std::size_t j = 0; j < J; ++j) {
            lhs.add(lw_[j] * obs_.phi(u[j]));
            init.add(lw_[j] * phi0);
        }
        pass.lhs = lhs.value();
        pass.init = init.value();
        pass.wick_drift = wick_drift.value();
        pass.wick_corr = wick_corr.value();
        pass.zam_drift = zam_drift.value();
        pass.zam_corr = zam_corr.value();
    }
    return pass;
}

double PathwiseEvaluator::ito_integral(const ModePath& path) const { return run(path, false).ito; }

namespace {

PathwiseTerms assemble(double lhs, double init, double ito, double drift, double correction) {
    PathwiseTerms t;
    t.lhs = lhs;
    t.init = init;
    t.ito_integral = ito;
    t.drift = drift;
    t.correction = correction;
    t.residual = lhs - init - ito - drift - correction;
    t.scale = std::max({std::abs(lhs), std::abs(init), std::abs(ito), std::abs(drift),
                        std::abs(correction)});
    return t;
}

}  // namespace

std::array<PathwiseTerms, 2> PathwiseEvaluator::both_forms(const ModePath& path) const {
    if (!(epsilon_ > 0.0)) throw DomainError("pathwise identity needs eps > 0");
    const Pass p = run(path, true);
    return {assemble(p.lhs, p.init, p.ito, p.wick_drift, p.wick_corr),
            assemble(p.lhs, p.init, p.ito, p.zam_drift, p.zam_corr)};
}

PathwiseTerms PathwiseEvaluator::identity(const ModePath& path, IdentityForm form) const {
    const auto both = both_forms(path);
    return form == IdentityForm::wick_form ? both[0] : both[1];
}

double pathwise_ito_integral(const EigenSystem& basis, const ModePath& path,
                             const ObservableTriple& obs, const SpaceWindow& l,
                             std::size_t legendre_points) {
    if (path.n_modes != basis.n_modes()) throw DomainError("path and basis mode counts differ");
    return PathwiseEvaluator(basis, obs, l, path.grid, path.epsilon, legendre_points)
        .ito_integral(path);
}

PathwiseTerms pathwise_identity_residual(const EigenSystem& basis, const ModePath& path,
                                         const ObservableTriple& obs, const SpaceWindow& l,
                                         IdentityForm form, std::size_t legendre_points) {
    if (!(path.epsilon > 0.0)) throw DomainError("pathwise identity needs eps > 0");
    if (path.n_modes != basis.n_modes()) throw DomainError("path and basis mode counts differ");
    return PathwiseEvaluator(basis, obs, l, path.grid, path.epsilon, legendre_points)
        .identity(path, form);
}

}  // namespace spdeito
