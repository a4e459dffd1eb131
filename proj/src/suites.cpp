#include "spdeito/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "spdeito/errors.hpp"
#include "spdeito/format.hpp"
#include "spdeito/gaussian_semigroup.hpp"
#include "spdeito/hida_norms.hpp"
#include "spdeito/mc_paths.hpp"
#include "spdeito/parallel.hpp"
#include "spdeito/quadrature.hpp"
#include "spdeito/regularization_study.hpp"
#include "spdeito/spectral_kernel.hpp"
#include "spdeito/stransform_engine.hpp"

namespace spdeito {

namespace {

using nlohmann::json;

std::string fmt(double v) { return format_double(v); }

double rel_err(double a, double b) {
    const double d = std::abs(b);
    return d > 0.0 ? std::abs(a - b) / d : std::abs(a);
}

EngineOptions engine_options(const ScenarioConfig& c) {
    EngineOptions o;
    o.hermite_order = c.quadrature.hermite_order;
    o.legendre_points = c.quadrature.legendre_points;
    o.stieltjes_panels = c.quadrature.stieltjes_K;
    o.panel_points = c.quadrature.panel_points;
    return o;
}

std::size_t grid_index(const TimeGrid& grid, double t) {
    const double k = t / grid.dt();
    const auto ki = static_cast<std::size_t>(std::llround(k));
    if (std::abs(k - static_cast<double>(ki)) > 1e-9 || ki > grid.steps()) {
        throw ConfigError("time " + fmt(t) + " is not a point of the Monte Carlo grid");
    }
    return ki;
}

std::size_t steps_for(double horizon, double delta) {
    const double k = horizon / delta;
    const auto ki = static_cast<std::size_t>(std::llround(k));
    if (ki == 0 || std::abs(k - static_cast<double>(ki)) > 1e-9) {
        throw ConfigError("step " + fmt(delta) + " does not divide the horizon " + fmt(horizon));
    }
    return ki;
}

// ---------------------------------------------------------------------------
// Quadrature oracles for the closed-form variance functionals.

// int_0^t w(v) int_0^1 g_{v+eps}(x,y) D g_{v+eps}(x,y) dy dv with D = identity or d_xx,
// by a graded rule in v and Gauss-Legendre in y.
double space_time_oracle(const EigenSystem& basis, const ModalGrid& grid, const QuadratureRule& yrule,
                         double t, double x, double eps, bool with_dxx) {
    const std::size_t N = basis.n_modes();
    const std::size_t J = yrule.nodes.size();
    const QuadratureRule vrule = graded_rule(t, 64, 8);
    std::vector<double> c(N), cd(N), g(J), gd(J);
    CompensatedSum acc;
    for (std::size_t i = 0; i < vrule.nodes.size(); ++i) {
        const double v = vrule.nodes[i] + eps;
        for (std::size_t n = 1; n <= N; ++n) {
            c[n - 1] = std::exp(-basis.lambda(n) * v) * basis.e(n, x);
            cd[n - 1] = -basis.mu(n) * c[n - 1];
        }
        grid.synthesize(c, g);
        if (with_dxx) grid.synthesize(cd, gd);
        CompensatedSum inner;
        for (std::size_t j = 0; j < J; ++j) inner.add(yrule.weights[j] * g[j] * (with_dxx ? gd[j] : g[j]));
        acc.add(vrule.weights[i] * inner.value());
    }
    return acc.value();
}

double counterterm_oracle(const EigenSystem& basis, const ModalGrid& grid, const QuadratureRule& yrule,
                          double x, double eps) {
    const std::size_t N = basis.n_modes();
    std::vector<double> c(N), g(yrule.nodes.size());
    for (std::size_t n = 1; n <= N; ++n) c[n - 1] = std::exp(-basis.lambda(n) * eps) * basis.e(n, x);
    grid.synthesize(c, g);
    CompensatedSum acc;
    for (std::size_t j = 0; j < g.size(); ++j) acc.add(yrule.weights[j] * g[j] * g[j]);
    return acc.value();
}

// ---------------------------------------------------------------------------

SuiteResult kernel_selftest(const ScenarioConfig& c, const SuiteOptions& opt) {
    SuiteResult out{Report("kernel-selftest"), {}};
    Report& rep = out.report;
    const EigenSystem basis(c.n_modes, c.kappa);
    const double tol_exact = c.tolerance("kernel_exact");
    const double tol_sym = c.tolerance("kernel_symmetry");
    const double tol_fd = c.tolerance("kernel_fd");
    const double tol_cf = c.tolerance("closed_form");
    const std::string meta = "N=" + std::to_string(basis.n_modes()) + ";kappa=" + fmt(basis.kappa());

    const QuadratureRule yrule = gauss_legendre(c.quadrature.legendre_points, 0.0, 1.0);
    const ModalGrid grid(basis, yrule.nodes);

    // Orthonormality of the eigenfunctions under the spatial rule.
    {
        double worst = 0.0;
        for (std::size_t n = 1; n <= basis.n_modes(); ++n) {
            for (std::size_t m = n; m <= basis.n_modes(); ++m) {
                double s = 0.0;
                for (std::size_t j = 0; j < yrule.nodes.size(); ++j) s += yrule.weights[j] * grid.e(n, j) * grid.e(m, j);
                worst = std::max(worst, std::abs(s - (n == m ? 1.0 : 0.0)));
            }
        }
        rep.check("basis", "orthonormality_max_err", worst, tol_exact, worst <= tol_exact, meta);
    }

    std::mt19937_64 rng(c.mc.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    // Symmetry and boundary vanishing.
    {
        double worst = 0.0;
        std::vector<std::array<double, 3>> pts{{0.2, 0.3, 0.7}};
        for (std::size_t i = 0; i < c.kernel.n_random; ++i) pts.push_back({draw(0.01, 1.0), draw(0.0, 1.0), draw(0.0, 1.0)});
        for (const auto& [t, x, y] : pts) {
            const double a = kernel(basis, {t, x, y, 0.0});
            const double b = kernel(basis, {t, y, x, 0.0});
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        rep.check("symmetry", "max_rel_asymmetry", worst, tol_sym, worst <= tol_sym, meta);
        double edge = 0.0;
        for (const double y : {0.1, 0.5, 0.9}) {
            edge = std::max({edge, std::abs(kernel(basis, {0.1, 0.0, y, 0.0})),
                             std::abs(kernel(basis, {0.1, 1.0, y, 0.0})),
                             std::abs(kernel_dxx(basis, {0.1, 0.0, y, 0.0}))});
        }
        rep.check("boundary", "max_abs_boundary_value", edge, tol_exact, edge <= tol_exact, meta);
    }

    // Chapman-Kolmogorov.
    {
        std::vector<std::array<double, 4>> pts{{0.1, 0.2, 0.3, 0.6}};
        for (std::size_t i = 0; i < c.kernel.n_random; ++i) {
            pts.push_back({draw(0.05, 0.5), draw(0.05, 0.5), draw(0.05, 0.95), draw(0.05, 0.95)});
        }
        double worst = 0.0;
        std::vector<double> a(basis.n_modes()), b(basis.n_modes()), ga(yrule.nodes.size()), gb(yrule.nodes.size());
        for (const auto& [t, s, x, y] : pts) {
            for (std::size_t n = 1; n <= basis.n_modes(); ++n) {
                a[n - 1] = std::exp(-basis.lambda(n) * t) * basis.e(n, x);
                b[n - 1] = std::exp(-basis.lambda(n) * s) * basis.e(n, y);
            }
            grid.synthesize(a, ga);
            grid.synthesize(b, gb);
            CompensatedSum acc;
            for (std::size_t j = 0; j < ga.size(); ++j) acc.add(yrule.weights[j] * ga[j] * gb[j]);
            worst = std::max(worst, rel_err(acc.value(), kernel(basis, {t + s, x, y, 0.0})));
        }
        rep.check("chapman_kolmogorov", "max_rel_err", worst, tol_exact, worst <= tol_exact,
                  meta + ";points=" + std::to_string(pts.size()));
    }

    // Finite-difference checks at (t, x, y) = (0.3, 0.4, 0.6).
    {
        const double t = 0.3, x = 0.4, y = 0.6, h = 1e-4;
        const double fd_xx = (kernel(basis, {t, x + h, y, 0.0}) - 2.0 * kernel(basis, {t, x, y, 0.0}) +
                              kernel(basis, {t, x - h, y, 0.0})) / (h * h);
        const double dxx = kernel_dxx(basis, {t, x, y, 0.0});
        const double e1 = rel_err(dxx, fd_xx);
        rep.check("kernel_dxx", "fd_rel_err", e1, tol_fd, e1 <= tol_fd, meta);
        const double dt = (kernel(basis, {t + h, x, y, 0.0}) - kernel(basis, {t - h, x, y, 0.0})) / (2.0 * h);
        const double heat = std::abs(dt - basis.kappa() * dxx);
        rep.check("heat_equation", "abs_residual", heat, tol_fd, heat <= tol_fd, meta);
        const double rate_fd = (sigma2(basis, t + h, x) - sigma2(basis, t - h, x)) / (2.0 * h);
        const double e2 = rel_err(sigma2_rate(basis, t, x), rate_fd);
        rep.check("sigma2_rate", "fd_rel_err", e2, tol_fd, e2 <= tol_fd, meta);
    }

    // Closed forms against space-time quadrature on randomized inputs.
    {
        struct Input {
            double t, x, eps;
        };
        std::vector<Input> inputs;
        for (std::size_t i = 0; i < c.kernel.n_random; ++i) inputs.push_back({draw(0.05, 1.0), draw(0.05, 0.95), draw(0.005, 0.1)});
        std::vector<std::array<double, 3>> errs(inputs.size());
        parallel_for(inputs.size(), opt.workers, [&](std::size_t i) {
            const auto& in = inputs[i];
            const double s2 = space_time_oracle(basis, grid, yrule, in.t, in.x, in.eps, false);
            const double wk = basis.kappa() * space_time_oracle(basis, grid, yrule, in.t, in.x, in.eps, true);
            const double ct = counterterm_oracle(basis, grid, yrule, in.x, in.eps);
            errs[i] = {rel_err(sigma2(basis, in.t, in.x, in.eps), s2),
                       rel_err(wick_correction(basis, in.t, in.x, in.eps), wk),
                       rel_err(counterterm(basis, in.x, in.eps), ct)};
        });
        const char* names[3] = {"sigma2", "wick_correction", "counterterm"};
        for (std::size_t q = 0; q < 3; ++q) {
            double worst = 0.0;
            for (const auto& e : errs) worst = std::max(worst, e[q]);
            rep.check(std::string("closed_form/") + names[q], "max_rel_err", worst, tol_cf, worst <= tol_cf,
                      meta + ";inputs=" + std::to_string(inputs.size()));
        }
    }

    // Stationary variance x(1-x)/(2 kappa).
    {
        const EigenSystem big(c.kernel.stationary_n_modes, c.kappa);
        const double tol = c.tolerance("stationary");
        for (const double x : {0.25, 0.5, 0.75}) {
            const double v = sigma2(big, 5.0, x, 0.0);
            const double target = x * (1.0 - x) / (2.0 * c.kappa);
            const double err = std::abs(v - target);
            rep.check("stationary/x=" + fmt(x), "abs_err", err, tol, err <= tol,
                      "N=" + std::to_string(big.n_modes()) + ";t=5;value=" + fmt(v));
        }
    }

    // Gaussian semigroup closed forms.
    {
        const HeatSemigroup sg(c.quadrature.hermite_order);
        const double q = sg.apply(registry("quadratic"), 0, 0.3, 1.0);
        const double eq = std::abs(q - 1.3);
        rep.check("semigroup/quadratic", "abs_err", eq, tol_exact, eq <= tol_exact, "v=0.3;z=1");
        const double cs = sg.apply(registry("cosine"), 0, 0.5, 0.7);
        const double ec = std::abs(cs - std::exp(-0.25) * std::cos(0.7));
        rep.check("semigroup/cosine", "abs_err", ec, tol_exact, ec <= tol_exact, "v=0.5;z=0.7");
    }
    return out;
}

// ---------------------------------------------------------------------------

double mean_bound(const EigenSystem& basis, const ScenarioConfig& c) {
    double z = 0.0;
    for (const auto& spec : c.shift_fields) {
        const ShiftField f(c.horizon, spec.modes);
        for (const double t : c.times) {
            for (int i = 1; i < 10; ++i) z = std::max(z, std::abs(mean_bundle(basis, t, 0.1 * i, f).m));
        }
    }
    return z;
}

SuiteResult verify_ito(const ScenarioConfig& c, const SuiteOptions& opt) {
    SuiteResult out{Report("verify-ito"), {}};
    Report& rep = out.report;
    const EigenSystem basis(c.n_modes, c.kappa);
    const double z = mean_bound(basis, c) + 1.0;
    const double max_var = sigma2(basis, c.horizon, 0.5);

    struct Scenario {
        std::string obs, window, shift;
        double t;
    };
    std::vector<Scenario> scenarios;
    for (const auto& o : c.observables)
        for (const auto& w : c.windows)
            for (const auto& s : c.shift_fields)
                for (const double t : c.times) scenarios.push_back({o, w, s.name, t});

    std::map<std::string, std::size_t> orders;
    for (const auto& o : c.observables) {
        orders[o] = select_hermite_order(registry(o), max_var, -z, z, c.quadrature.hermite_order);
    }

    // One engine pass per (obs, shift, t) covers every window.
    std::vector<SpaceWindow> windows;
    for (const auto& w : c.windows) windows.push_back(window_registry(w));
    const std::size_t n_shift = c.shift_fields.size();
    const std::size_t n_time = c.times.size();
    const std::size_t n_groups = c.observables.size() * n_shift * n_time;
    std::vector<std::vector<TermBreakdown>> grouped(n_groups);
    parallel_for(n_groups, opt.workers, [&](std::size_t g) {
        const std::size_t ti = g % n_time;
        const std::size_t si = (g / n_time) % n_shift;
        const std::string& o = c.observables[g / (n_time * n_shift)];
        EngineOptions eo = engine_options(c);
        eo.hermite_order = orders.at(o);
        const StransformEngine engine(basis, eo);
        grouped[g] = engine.residual_windows(0.0, c.times[ti], registry(o), windows, c.shift(c.shift_fields[si].name));
    });
    std::vector<TermBreakdown> results;
    for (std::size_t o = 0; o < c.observables.size(); ++o)
        for (std::size_t w = 0; w < windows.size(); ++w)
            for (std::size_t si = 0; si < n_shift; ++si)
                for (std::size_t ti = 0; ti < n_time; ++ti) results.push_back(grouped[(o * n_shift + si) * n_time + ti][w]);

    json breakdowns = json::array();
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto& s = scenarios[i];
        const auto& b = results[i];
        const double tol = s.obs == "linear" ? c.tolerance("residual_linear") : c.tolerance("residual_nonlinear");
        const std::string key = "obs=" + s.obs + ";l=" + s.window + ";f=" + s.shift + ";t=" + fmt(s.t);
        const double rr = b.relative_residual();
        rep.check(key, "relative_residual", rr, tol, rr <= tol,
                  "hermite=" + std::to_string(orders.at(s.obs)) + ";residual=" + fmt(b.residual) +
                      ";scale=" + fmt(b.scale));
        breakdowns.push_back({{"obs", s.obs}, {"window", s.window}, {"shift", s.shift}, {"t", s.t},
                              {"lhs", b.lhs}, {"init", b.init}, {"ito_integral", b.ito_integral},
                              {"wick_drift", b.wick_drift}, {"ito_correction", b.ito_correction},
                              {"residual", b.residual}, {"scale", b.scale},
                              {"hermite_order", b.quadrature.hermite_order},
                              {"legendre_points", b.quadrature.legendre_points},
                              {"stieltjes_panels", b.quadrature.stieltjes_panels},
                              {"panel_points", b.quadrature.panel_points},
                              {"grading_exponent", b.quadrature.grading_exponent}});
    }
    out.artifacts["verify-ito_breakdowns.json"] = breakdowns.dump(2) + "\n";

    // Quadrature doubling: one scenario per observable at the middle time, K -> 2K.
    const std::size_t t_idx = n_time / 2;
    const double t_mid = c.times[t_idx];
    const std::string& w0 = c.windows.front();
    const std::string& s_last = c.shift_fields.back().name;
    std::vector<std::array<double, 4>> refine(c.observables.size());
    parallel_for(c.observables.size(), opt.workers, [&](std::size_t i) {
        const auto obs = registry(c.observables[i]);
        EngineOptions eo = engine_options(c);
        eo.hermite_order = orders.at(c.observables[i]);
        const auto& coarse = grouped[(i * n_shift + n_shift - 1) * n_time + t_idx].front();
        eo.stieltjes_panels *= 2;
        eo.check_refinement = true;
        eo.refinement_tol = c.tolerance("refinement_change");
        const auto fine = StransformEngine(basis, eo).residual(t_mid, obs, window_registry(w0), c.shift(s_last));
        refine[i] = {std::abs(coarse.residual), std::abs(fine.residual), coarse.scale, fine.quadrature.mesh_change};
    });
    for (std::size_t i = 0; i < c.observables.size(); ++i) {
        const std::string key = "obs=" + c.observables[i] + ";l=" + w0 + ";f=" + s_last + ";t=" + fmt(t_mid);
        const auto& [rc, rf, scale, change] = refine[i];
        const double slack = 1e-12 * scale;
        rep.check(key, "residual_after_doubling", rf, rc + slack, rf <= rc + slack,
                  "K=" + std::to_string(2 * c.quadrature.stieltjes_K) + ";residual_at_K=" + fmt(rc));
        const double tol = c.tolerance("refinement_change");
        rep.check(key, "ito_correction_mesh_change", change, tol, change <= tol,
                  "K=" + std::to_string(2 * c.quadrature.stieltjes_K) + "->" +
                      std::to_string(4 * c.quadrature.stieltjes_K));
    }
    return out;
}

// ---------------------------------------------------------------------------

SuiteResult verify_pathwise(const ScenarioConfig& c, const SuiteOptions& opt) {
    SuiteResult out{Report("verify-pathwise"), {}};
    Report& rep = out.report;
    const EigenSystem basis(c.mc.n_modes, c.kappa);
    const ShiftField f = c.shift(c.mc.shift);
    const double k_sigma = c.tolerance("mc_sigma");
    const std::size_t n = c.mc.n_samples;
    const HeatSemigroup sg(c.quadrature.hermite_order);
    const std::string meta = "N=" + std::to_string(basis.n_modes()) + ";n=" + std::to_string(n) +
                             ";seed=" + std::to_string(c.mc.seed) + ";f=" + c.mc.shift;
    const std::uint64_t stream_block = 1ull << 32;

    // Shifted estimator, exact OU single step to each spot time.
    const auto& spots = c.mc.spot_checks;
    std::vector<Estimate> shifted;
    std::vector<double> oracle;
    for (std::size_t i = 0; i < spots.size(); ++i) {
        const auto& sp = spots[i];
        const auto obs = registry(sp.observable);
        SamplerConfig sc;
        sc.scheme = Scheme::exact_ou;
        sc.grid = TimeGrid(sp.t, 1);
        sc.seed = c.mc.seed;
        sc.stream_base = (i + 1) * stream_block;
        sc.workers = opt.workers;
        const double x = sp.x;
        const PathFunctional fn = [obs, x](const FieldView& v) { return obs.phi(v.value(v.final_step(), x)); };
        shifted.push_back(estimate_stransform(basis, fn, f, n, EstimatorMode::shifted, sc));
        const MeanBundle mb = mean_bundle(basis, sp.t, x, f);
        oracle.push_back(sg.apply(obs, 0, sigma2(basis, sp.t, x), mb.m));
        const std::string key = "obs=" + sp.observable + ";t=" + fmt(sp.t) + ";x=" + fmt(x);
        const double dev = std::abs(shifted.back().value - oracle.back());
        const double band = k_sigma * shifted.back().std_error;
        rep.estimate(key, "shifted_estimate", shifted.back().value, shifted.back().std_error, band, dev <= band,
                     meta + ";oracle=" + fmt(oracle.back()) + ";scheme=exact_ou");
    }

    // Weighted estimator on exp-Euler paths over the full horizon, all spots on the same paths.
    SamplerConfig wc;
    wc.scheme = Scheme::exp_euler;
    wc.grid = TimeGrid(c.horizon, steps_for(c.horizon, c.mc.delta));
    wc.seed = c.mc.seed;
    wc.stream_base = 0;
    wc.workers = opt.workers;
    std::vector<PathFunctional> fns;
    for (const auto& sp : spots) {
        const auto obs = registry(sp.observable);
        const std::size_t k = grid_index(wc.grid, sp.t);
        const double x = sp.x;
        fns.push_back([obs, k, x](const FieldView& v) { return obs.phi(v.value(k, x)); });
    }
    fns.push_back([](const FieldView&) { return 1.0; });
    fns.push_back([f](const FieldView& v) { return stoch_exponential(v.path(), f); });
    const auto weighted = estimate_stransform(basis, fns, f, n, EstimatorMode::weighted, wc);
    const std::string wmeta = meta + ";scheme=exp_euler;delta=" + fmt(c.mc.delta);

    for (std::size_t i = 0; i < spots.size(); ++i) {
        const auto& sp = spots[i];
        const std::string key = "obs=" + sp.observable + ";t=" + fmt(sp.t) + ";x=" + fmt(sp.x);
        const auto& w = weighted[i];
        const auto& s = shifted[i];
        const double combined = std::sqrt(w.std_error * w.std_error + s.std_error * s.std_error);
        const double dev = std::abs(w.value - s.value);
        rep.estimate(key, "weighted_estimate", w.value, w.std_error, k_sigma * combined, dev <= k_sigma * combined,
                     wmeta + ";shifted=" + fmt(s.value));
        rep.check(key, "shifted_over_weighted_std_error", s.std_error / w.std_error, 1.0,
                  s.std_error <= w.std_error, "");
    }

    const auto& e1 = weighted[spots.size()];
    rep.estimate("stoch_exponential", "mean", e1.value, e1.std_error, k_sigma * e1.std_error,
                 std::abs(e1.value - 1.0) <= k_sigma * e1.std_error, wmeta + ";target=1");
    const auto& e2 = weighted[spots.size() + 1];
    const double target2 = std::exp(f.squared_norm());
    rep.estimate("stoch_exponential", "second_moment", e2.value, e2.std_error, k_sigma * e2.std_error,
                 std::abs(e2.value - target2) <= k_sigma * e2.std_error, wmeta + ";target=" + fmt(target2));

    // Exact OU marginal variance of the first mode at the horizon.
    {
        SamplerConfig sc;
        sc.scheme = Scheme::exact_ou;
        sc.grid = TimeGrid(c.horizon, 1);
        sc.seed = c.mc.seed;
        sc.stream_base = (spots.size() + 1) * stream_block;
        sc.workers = opt.workers;
        const PathFunctional sq = [](const FieldView& v) {
            const double a = v.path().coeff(1, v.final_step());
            return a * a;
        };
        const auto est = estimate_stransform(basis, sq, ShiftField::zero(c.horizon), n, EstimatorMode::shifted, sc);
        const double lam = basis.lambda(1);
        const double target = mode_coeff::sigma2(lam, c.horizon, 0.0);
        const double band = k_sigma * est.std_error;
        rep.estimate("exact_ou/mode=1", "terminal_variance", est.value, est.std_error, band,
                     std::abs(est.value - target) <= band, meta + ";target=" + fmt(target));
    }
    return out;
}

// ---------------------------------------------------------------------------

SuiteResult verify_zambotti(const ScenarioConfig& c, const SuiteOptions& opt) {
    SuiteResult out{Report("verify-zambotti"), {}};
    Report& rep = out.report;
    const auto& pc = c.pathwise;
    const EigenSystem basis(pc.n_modes, c.kappa);
    const auto obs = registry(pc.observable);
    const auto window = window_registry(pc.window);
    const std::size_t n = pc.n_samples;
    const std::string meta = "N=" + std::to_string(basis.n_modes()) + ";eps=" + fmt(pc.epsilon) + ";n=" +
                             std::to_string(n) + ";obs=" + pc.observable + ";l=" + pc.window +
                             ";seed=" + std::to_string(c.mc.seed);
    const double tol_forms = c.tolerance("form_agreement");

    std::vector<double> log_delta, log_rms[2];
    for (const double delta : pc.delta_ladder) {
        const TimeGrid grid(c.horizon, steps_for(c.horizon, delta));
        const PathwiseEvaluator ev(basis, obs, window, grid, pc.epsilon, pc.legendre_points);
        std::vector<double> sq[2] = {std::vector<double>(n), std::vector<double>(n)};
        std::vector<double> form_gap(n);
        parallel_for(n, opt.workers, [&](std::size_t i) {
            const ModePath path = sample_path(basis, Scheme::exp_euler, grid, pc.epsilon, c.mc.seed, i);
            const auto both = ev.both_forms(path);
            for (int f = 0; f < 2; ++f) sq[f][i] = both[f].residual * both[f].residual;
            const double scale = std::max(both[0].scale, both[1].scale);
            form_gap[i] = scale > 0.0 ? std::abs(both[0].residual - both[1].residual) / scale : 0.0;
        });
        const std::string key = "delta=" + fmt(delta);
        const char* names[2] = {"rms_residual_wick_form", "rms_residual_zambotti_form"};
        for (int f = 0; f < 2; ++f) {
            const Estimate ms = summarize(sq[f]);
            const double rms = std::sqrt(ms.value);
            const double se = rms > 0.0 ? ms.std_error / (2.0 * rms) : 0.0;
            rep.estimate(key, names[f], rms, se, std::numeric_limits<double>::quiet_NaN(), true, meta);
            log_rms[f].push_back(std::log(rms));
        }
        log_delta.push_back(std::log(delta));
        const double worst = *std::max_element(form_gap.begin(), form_gap.end());
        rep.check(key, "max_form_difference_over_scale", worst, tol_forms, worst <= tol_forms, meta);
    }

    const double lo = c.tolerance("pathwise_slope_min");
    const double hi = c.tolerance("pathwise_slope_max");
    const char* forms[2] = {"wick_form", "zambotti_form"};
    for (int f = 0; f < 2; ++f) {
        const LineFit fit = least_squares(log_delta, log_rms[f]);
        rep.check(forms[f], "rms_slope", fit.slope, hi, fit.slope >= lo && fit.slope <= hi,
                  "band=[" + fmt(lo) + ";" + fmt(hi) + "];r_squared=" + fmt(fit.r_squared));
    }
    return out;
}

// ---------------------------------------------------------------------------

SuiteResult renorm_study(const ScenarioConfig& c, const SuiteOptions& opt) {
    SuiteResult out{Report("renorm-study"), {}};
    Report& rep = out.report;
    const auto& rc = c.renorm;
    const EigenSystem basis(rc.n_modes, c.kappa);
    const auto& ladder = c.epsilon_ladder;
    const double half = c.tolerance("divergence_slope_halfwidth");
    const std::string meta = "N=" + std::to_string(basis.n_modes()) + ";t=" + fmt(rc.t);

    const DivergenceFit ct = divergence_fit(DivergenceQuantity::counterterm, rc.x_divergent, rc.t, ladder, basis);
    const DivergenceFit gs = divergence_fit(DivergenceQuantity::grad_square_mean, rc.x_divergent, rc.t, ladder, basis);
    const DivergenceFit rn = divergence_fit(DivergenceQuantity::renormalized_mean, rc.x_renormalized, rc.t, ladder, basis);

    json fits = json::array();
    for (const auto* fit : {&ct, &gs, &rn}) fits.push_back(json::parse(fit_to_json(*fit)));
    out.artifacts["renorm-study_fits.json"] = fits.dump(2) + "\n";

    for (const auto* fit : {&ct, &gs}) {
        const std::string key = std::string(to_string(fit->quantity)) + ";x=" + fmt(fit->x);
        rep.check(key, "loglog_slope", fit->slope, half, std::abs(fit->slope + 0.5) <= half,
                  meta + ";target=-0.5;r_squared=" + fmt(fit->r_squared));
    }
    {
        const std::string key = "renormalized_mean;x=" + fmt(rn.x);
        const double margin = c.tolerance("renormalized_slope_margin");
        rep.check(key, "loglog_slope", rn.slope, -margin, rn.slope >= -margin,
                  meta + ";r_squared=" + fmt(rn.r_squared));
        rep.check(key, "cauchy_diffs_decreasing", rn.cauchy_decreasing() ? 1.0 : 0.0, rn.roundoff_floor,
                  rn.cauchy_decreasing(), meta + ";last_diff=" + fmt(rn.cauchy_diffs.back()));
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            rep.info(key + ";eps=" + fmt(ladder[i]), "value", rn.values[i]);
        }
    }

    // Counterterm monotonicity and Leibniz identity along the ladder.
    {
        bool monotone = true;
        for (std::size_t i = 1; i < ct.values.size(); ++i) monotone = monotone && ct.values[i] > ct.values[i - 1];
        rep.check("counterterm;x=" + fmt(rc.x_divergent), "strictly_decreasing_in_eps", monotone ? 1.0 : 0.0, 1.0,
                  monotone, meta);
        const double tol = c.tolerance("leibniz");
        double worst = 0.0;
        for (const double eps : ladder) {
            const double x = rc.x_renormalized;
            const double rate = sigma2_rate(basis, rc.t, x, eps);
            const double rhs = counterterm(basis, x, eps) + 2.0 * wick_correction(basis, rc.t, x, eps);
            worst = std::max(worst, std::abs(rate - rhs) / std::max(1.0, std::abs(counterterm(basis, x, eps))));
        }
        rep.check("leibniz;x=" + fmt(rc.x_renormalized), "max_rel_err", worst, tol, worst <= tol, meta);
    }

    // Per-mode cancellation identity (kappa = 1/2 only).
    if (c.kappa == 0.5) {
        double worst = 0.0;
        const double x = rc.x_renormalized;
        const double pi = 3.14159265358979323846;
        for (const double eps : ladder) {
            for (std::size_t n = 1; n <= basis.n_modes(); ++n) {
                const double lam = basis.lambda(n);
                const double cn = std::cos(pi * static_cast<double>(n) * x);
                const double expected = std::exp(-2.0 * lam * eps) *
                                        (2.0 * std::cos(2.0 * pi * static_cast<double>(n) * x) -
                                         2.0 * std::exp(-2.0 * lam * rc.t) * cn * cn);
                worst = std::max(worst, std::abs(renormalized_mode(basis, n, rc.t, x, eps) - expected));
            }
        }
        const double tol = 1e-14;
        rep.check("per_mode_cancellation;x=" + fmt(x), "max_abs_err", worst, tol, worst <= tol, meta);
    }

    // Convergence table for the S-transform terms.
    {
        const EigenSystem tb(c.n_modes, c.kappa);
        const auto table = epsilon_convergence_table(tb, registry(rc.table_observable), window_registry(rc.table_window),
                                                     c.shift(rc.table_shift), rc.t, ladder, engine_options(c),
                                                     opt.workers);
        out.artifacts["renorm-study_epsilon_table.csv"] = table.to_csv();
        const std::string key = "table;obs=" + rc.table_observable + ";l=" + rc.table_window + ";f=" +
                                rc.table_shift + ";t=" + fmt(rc.t);
        const std::string tmeta = "N=" + std::to_string(tb.n_modes());
        // Differences along the decade chain eps_0, eps_0/10, ... drawn from the ladder.
        {
            const auto col = table.column("lhs");
            std::vector<double> decade;
            std::size_t prev = 0;
            for (std::size_t j = 1; j < ladder.size(); ++j) {
                if (std::abs(ladder[j] * 10.0 / ladder[prev] - 1.0) < 1e-9) {
                    decade.push_back(std::abs(col[prev] - col[j]));
                    prev = j;
                }
            }
            bool dec = decade.size() >= 2;
            for (std::size_t i = 1; i < decade.size(); ++i) dec = dec && decade[i] < decade[i - 1];
            const double last = decade.empty() ? std::numeric_limits<double>::quiet_NaN() : decade.back();
            rep.check(key, "lhs_decade_diffs_decreasing", dec ? 1.0 : 0.0, 1.0, dec,
                      tmeta + ";pairs=" + std::to_string(decade.size()));
            const double tol = c.tolerance("table_final_diff");
            rep.check(key, "lhs_final_decade_diff", last, tol, last <= tol, tmeta);
        }
        for (const char* term : {"lhs", "ito_integral", "wick_drift", "ito_correction"}) {
            const auto col = table.column(term);
            const double ref = [&] {
                const auto& r = table.reference;
                const std::string_view t(term);
                if (t == "lhs") return r.lhs;
                if (t == "ito_integral") return r.ito_integral;
                if (t == "wick_drift") return r.wick_drift;
                return r.ito_correction;
            }();
            const double first = std::abs(col.front() - ref);
            const double last = std::abs(col.back() - ref);
            rep.check(key, std::string(term) + "_distance_to_eps0", last, first, last < first,
                      tmeta + ";first_rung_distance=" + fmt(first));
        }
        // eps = 0 reference against the same evaluation on the doubled graded mesh.
        EngineOptions eo = engine_options(c);
        eo.stieltjes_panels *= 2;
        const double fine = StransformEngine(tb, eo).ito_correction_term(
            rc.t, registry(rc.table_observable), window_registry(rc.table_window), c.shift(rc.table_shift));
        const double ref = table.reference.ito_correction;
        const double err = rel_err(ref, fine);
        const double tol = c.tolerance("table_reference");
        rep.check(key, "ito_correction_eps0_vs_refined", err, tol, err <= tol,
                  tmeta + ";eps0=" + fmt(ref) + ";refined=" + fmt(fine));
    }
    return out;
}

// ---------------------------------------------------------------------------

SuiteResult hida_norm(const ScenarioConfig& c, const SuiteOptions& opt) {
    SuiteResult out{Report("hida-norm"), {}};
    Report& rep = out.report;
    const auto& hc = c.hida;
    const auto floored = MultiplierConvention::floored_default();
    const auto unit = MultiplierConvention::unit_multiplier();

    struct Job {
        std::size_t n_modes, resolution;
        MultiplierConvention conv;
    };
    const std::vector<Job> jobs{{hc.n_modes, hc.resolution, floored},
                                {2 * hc.n_modes, hc.resolution, floored},
                                {hc.n_modes, 2 * hc.resolution, floored},
                                {hc.n_modes, hc.resolution, unit}};
    std::vector<HidaNorm> res(jobs.size());
    parallel_for(jobs.size(), opt.workers, [&](std::size_t i) {
        res[i] = hida_norm_dxx(hc.t, hc.x, jobs[i].conv, EigenSystem(jobs[i].n_modes, c.kappa), c.horizon,
                               jobs[i].resolution);
    });
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string key = "t=" + fmt(hc.t) + ";x=" + fmt(hc.x) + ";N=" + std::to_string(jobs[i].n_modes) +
                                ";R=" + std::to_string(jobs[i].resolution) + ";convention=" + res[i].convention;
        rep.check(key, "norm", res[i].norm, std::numeric_limits<double>::quiet_NaN(),
                  std::isfinite(res[i].norm) && res[i].norm >= 0.0,
                  "upper_bound=" + fmt(res[i].upper_bound) + ";tail_bound=" + fmt(res[i].tail_bound));
        rep.info(key, "ratio", res[i].ratio);
    }
    const std::string base = "t=" + fmt(hc.t) + ";x=" + fmt(hc.x);
    const double stab = c.tolerance("hida_stability");
    const double dn = rel_err(res[1].norm, res[0].norm);
    rep.check(base + ";N=" + std::to_string(hc.n_modes) + "->" + std::to_string(2 * hc.n_modes), "rel_change", dn,
              stab, dn <= stab);
    rep.check(base + ";N=" + std::to_string(hc.n_modes) + "->" + std::to_string(2 * hc.n_modes),
              "nondecreasing_in_N", res[1].norm - res[0].norm, 0.0, res[1].norm >= res[0].norm);
    const double dr = rel_err(res[2].norm, res[0].norm);
    rep.check(base + ";R=" + std::to_string(hc.resolution) + "->" + std::to_string(2 * hc.resolution), "rel_change",
              dr, stab, dr <= stab);
    const double slack = c.tolerance("hida_ratio_slack");
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < 3; ++i) worst_ratio = std::max(worst_ratio, res[i].ratio);
    rep.check(base + ";convention=" + floored.name(), "max_ratio", worst_ratio, 1.0 + slack,
              worst_ratio <= 1.0 + slack);
    const double pv = std::abs(res[3].ratio - 1.0);
    const double ptol = c.tolerance("parseval");
    rep.check(base + ";convention=unit", "parseval_abs_err", pv, ptol, pv <= ptol);
    return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"kernel-selftest", "verify-ito",   "verify-pathwise",
                                                "verify-zambotti", "renorm-study", "hida-norm"};
    return names;
}

std::string suite_description(std::string_view name) {
    if (name == "kernel-selftest") return "heat kernel identities, closed forms, stationary variance";
    if (name == "verify-ito") return "S-transform residuals of the Ito-type identity";
    if (name == "verify-pathwise") return "Monte Carlo S-transform estimators against closed forms";
    if (name == "verify-zambotti") return "pathwise Wick and Zambotti forms under time refinement";
    if (name == "renorm-study") return "eps -> 0 divergence fits and term convergence table";
    if (name == "hida-norm") return "negative-order Hida norm of d_xx u";
    throw UnknownNameError("unknown suite: " + std::string(name));
}

SuiteResult run_suite(std::string_view name, const ScenarioConfig& config, const SuiteOptions& options) {
    if (name == "kernel-selftest") return kernel_selftest(config, options);
    if (name == "verify-ito") return verify_ito(config, options);
    if (name == "verify-pathwise") return verify_pathwise(config, options);
    if (name == "verify-zambotti") return verify_zambotti(config, options);
    if (name == "renorm-study") return renorm_study(config, options);
    if (name == "hida-norm") return hida_norm(config, options);
    throw UnknownNameError("unknown suite: " + std::string(name));
}

}  // namespace spdeito
