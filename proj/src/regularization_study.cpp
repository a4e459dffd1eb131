#include "spdeito/regularization_study.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "spdeito/errors.hpp"
#include "spdeito/format.hpp"
#include "spdeito/parallel.hpp"
#include "spdeito/quadrature.hpp"

namespace spdeito {

namespace {

constexpr double kTailThreshold = 1e-12;

void check_position(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x must lie in [0, 1]");
}

void check_ladder(std::span<const double> ladder) {
    if (ladder.size() < 2) throw DomainError("epsilon ladder needs at least two rungs");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0 && ladder[i] <= 0.1)) throw DomainError("ladder values must lie in (0, 0.1]");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) throw DomainError("ladder must be strictly decreasing");
    }
}

// Per-mode terms with their absolute sum, highest mode first.
template <typename Term>
std::pair<double, double> series(std::size_t n_modes, Term term) {
    CompensatedSum acc;
    double abs_sum = 0.0;
    for (std::size_t n = n_modes; n >= 1; --n) {
        const double v = term(n);
        acc.add(v);
        abs_sum += std::abs(v);
    }
    return {acc.value(), abs_sum};
}

double grad_mode(const EigenSystem& basis, std::size_t n, double t, double x, double epsilon) {
    const double lam = basis.lambda(n);
    const double c = std::cos(std::numbers::pi * static_cast<double>(n) * x);
    return std::exp(-2.0 * lam * epsilon) * (-std::expm1(-2.0 * lam * t)) * 2.0 * c * c *
           basis.mu(n) / (2.0 * lam);
}

double counterterm_mode(const EigenSystem& basis, std::size_t n, double x, double epsilon) {
    const double en = basis.e(n, x);
    return std::exp(-2.0 * basis.lambda(n) * epsilon) * en * en;
}

std::pair<double, double> quantity_series(DivergenceQuantity q, const EigenSystem& basis, double t,
                                          double x, double epsilon) {
    switch (q) {
        case DivergenceQuantity::counterterm:
            return series(basis.n_modes(), [&](std::size_t n) { return counterterm_mode(basis, n, x, epsilon); });
        case DivergenceQuantity::grad_square_mean:
            return series(basis.n_modes(), [&](std::size_t n) { return grad_mode(basis, n, t, x, epsilon); });
        case DivergenceQuantity::renormalized_mean:
            return series(basis.n_modes(),
                          [&](std::size_t n) { return renormalized_mode(basis, n, t, x, epsilon); });
    }
    return {0.0, 0.0};
}

}  // namespace

std::string_view to_string(DivergenceQuantity q) {
    switch (q) {
        case DivergenceQuantity::counterterm: return "counterterm";
        case DivergenceQuantity::grad_square_mean: return "grad_square_mean";
        case DivergenceQuantity::renormalized_mean: return "renormalized_mean";
    }
    return "unknown";
}

DivergenceQuantity parse_quantity(std::string_view name) {
    if (name == "counterterm") return DivergenceQuantity::counterterm;
    if (name == "grad_square_mean") return DivergenceQuantity::grad_square_mean;
    if (name == "renormalized_mean") return DivergenceQuantity::renormalized_mean;
    throw UnknownNameError("unknown quantity: " + std::string(name));
}

std::vector<double> default_epsilon_ladder() { return {1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5}; }

double grad_square_mean(const EigenSystem& basis, double t, double x, double epsilon) {
    check_position(x);
    if (!(t >= 0.0) || !(epsilon >= 0.0)) throw DomainError("t and epsilon must be non-negative");
    return quantity_series(DivergenceQuantity::grad_square_mean, basis, t, x, epsilon).first;
}

double renormalized_mode(const EigenSystem& basis, std::size_t n, double t, double x, double epsilon) {
    return grad_mode(basis, n, t, x, epsilon) - counterterm_mode(basis, n, x, epsilon);
}

double renormalized_mean(const EigenSystem& basis, double t, double x, double epsilon) {
    check_position(x);
    if (!(t >= 0.0) || !(epsilon > 0.0)) throw DomainError("need t >= 0 and epsilon > 0");
    return quantity_series(DivergenceQuantity::renormalized_mean, basis, t, x, epsilon).first;
}

bool DivergenceFit::cauchy_decreasing() const {
    for (std::size_t i = 1; i < cauchy_diffs.size(); ++i) {
        if (cauchy_diffs[i] <= roundoff_floor && cauchy_diffs[i - 1] <= roundoff_floor) continue;
        if (!(cauchy_diffs[i] < cauchy_diffs[i - 1])) return false;
    }
    return true;
}

LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("least squares needs two or more points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DomainError("least squares needs distinct abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

DivergenceFit divergence_fit(DivergenceQuantity quantity, double x, double t,
                             std::span<const double> ladder, const EigenSystem& basis) {
    check_position(x);
    check_ladder(ladder);
    if (!(t >= 0.0)) throw DomainError("t must be non-negative");
    const double eps_min = ladder.back();
    const double tail = std::exp(-2.0 * basis.lambda(basis.n_modes()) * eps_min);
    if (tail >= kTailThreshold) {
        throw ResolutionError("divergence_fit: exp(-2 lambda_N eps_min) = " + format_double(tail) +
                              " >= 1e-12; increase n_modes");
    }

    DivergenceFit fit;
    fit.quantity = quantity;
    fit.t = t;
    fit.x = x;
    fit.ladder.assign(ladder.begin(), ladder.end());
    double abs_max = 0.0;
    for (const double eps : ladder) {
        const auto [value, abs_sum] = quantity_series(quantity, basis, t, x, eps);
        fit.values.push_back(value);
        abs_max = std::max(abs_max, abs_sum);
    }
    fit.roundoff_floor = 64.0 * std::numeric_limits<double>::epsilon() * abs_max;
    for (std::size_t i = 1; i < fit.values.size(); ++i) {
        fit.cauchy_diffs.push_back(std::abs(fit.values[i] - fit.values[i - 1]));
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (fit.values[i] == 0.0) throw DomainError("divergence_fit: zero value has no logarithm");
        lx.push_back(std::log(ladder[i]));
        ly.push_back(std::log(std::abs(fit.values[i])));
    }
    const LineFit line = least_squares(lx, ly);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r_squared = line.r_squared;
    return fit;
}

const std::vector<std::string>& convergence_terms() {
    static const std::vector<std::string> terms{"lhs", "init", "ito_integral", "wick_drift",
                                                "ito_correction", "residual"};
    return terms;
}

namespace {

double term_value(const TermBreakdown& b, std::string_view term) {
    if (term == "lhs") return b.lhs;
    if (term == "init") return b.init;
    if (term == "ito_integral") return b.ito_integral;
    if (term == "wick_drift") return b.wick_drift;
    if (term == "ito_correction") return b.ito_correction;
    if (term == "residual") return b.residual;
    throw UnknownNameError("unknown term: " + std::string(term));
}

}  // namespace

std::vector<double> ConvergenceTable::column(std::string_view term) const {
    std::vector<double> out;
    for (const auto& b : breakdowns) out.push_back(term_value(b, term));
    return out;
}

std::string ConvergenceTable::to_csv() const {
    std::ostringstream os;
    os << "epsilon,term,value,cauchy_diff\n";
    for (const auto& r : rows) {
        os << format_double(r.epsilon) << ',' << r.term << ',' << format_double(r.value) << ','
           << format_double(r.cauchy_diff) << '\n';
    }
    return os.str();
}

ConvergenceTable epsilon_convergence_table(const EigenSystem& basis, const ObservableTriple& obs,
                                           const SpaceWindow& l, const ShiftField& f, double t,
                                           std::span<const double> ladder,
                                           const EngineOptions& options, std::size_t workers) {
    check_ladder(ladder);
    ConvergenceTable table;
    table.ladder.assign(ladder.begin(), ladder.end());
    table.breakdowns.resize(ladder.size() + 1);
    parallel_for(ladder.size() + 1, workers, [&](std::size_t i) {
        EngineOptions opt = options;
        opt.epsilon = i < ladder.size() ? ladder[i] : 0.0;
        table.breakdowns[i] = StransformEngine(basis, opt).residual(t, obs, l, f);
    });
    table.reference = table.breakdowns.back();
    table.breakdowns.pop_back();

    for (const auto& term : convergence_terms()) {
        const auto col = table.column(term);
        for (std::size_t i = 0; i < col.size(); ++i) {
            const double diff = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                                       : std::abs(col[i] - col[i - 1]);
            table.rows.push_back({ladder[i], term, col[i], diff});
        }
        table.rows.push_back({0.0, term, term_value(table.reference, term),
                              std::abs(term_value(table.reference, term) - col.back())});
    }
    return table;
}

std::string fit_to_json(const DivergenceFit& fit) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    nlohmann::json j;
    j["quantity"] = std::string(to_string(fit.quantity));
    j["t"] = fit.t;
    j["x"] = fit.x;
    j["ladder"] = fit.ladder;
    j["values"] = fit.values;
    j["cauchy_diffs"] = fit.cauchy_diffs;
    j["roundoff_floor"] = fit.roundoff_floor;
    j["slope"] = finite_or_null(fit.slope);
    j["intercept"] = finite_or_null(fit.intercept);
    j["r_squared"] = finite_or_null(fit.r_squared);
    return j.dump(2);
}

}  // namespace spdeito
