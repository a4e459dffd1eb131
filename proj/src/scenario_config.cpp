#include "spdeito/scenario_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spdeito/errors.hpp"
#include "spdeito/gaussian_semigroup.hpp"
#include "spdeito/mc_paths.hpp"
#include "spdeito/stransform_engine.hpp"

namespace spdeito {

using nlohmann::json;

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> defaults{
        {"kernel_exact", 1e-10},
        {"kernel_symmetry", 1e-14},
        {"kernel_fd", 1e-6},
        {"closed_form", 1e-8},
        {"stationary", 1e-6},
        {"residual_linear", 1e-8},
        {"residual_nonlinear", 1e-6},
        {"refinement_change", 1e-7},
        {"mc_sigma", 3.0},
        {"pathwise_slope_min", 0.4},
        {"pathwise_slope_max", 1.1},
        {"form_agreement", 1e-10},
        {"divergence_slope_halfwidth", 0.05},
        {"renormalized_slope_margin", 0.05},
        {"leibniz", 1e-12},
        {"table_reference", 1e-6},
        {"table_final_diff", 1e-6},
        {"hida_stability", 0.01},
        {"hida_ratio_slack", 1e-8},
        {"parseval", 1e-8},
    };
    return defaults;
}

double ScenarioConfig::tolerance(const std::string& key) const {
    const auto it = tolerances.find(key);
    if (it == tolerances.end()) throw ConfigError("unknown tolerance key '" + key + "'");
    return it->second;
}

ShiftField ScenarioConfig::shift(const std::string& name) const {
    for (const auto& s : shift_fields) {
        if (s.name == name) return ShiftField(horizon, s.modes);
    }
    throw ConfigError("no shift field named '" + name + "'");
}

namespace {

// Typed access to a JSON object that reports failures with the field path and
// rejects keys it was never asked about.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ConfigError(path + ": " + what);
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    const json& raw(const std::string& key) {
        if (!has(key)) fail(at(key), "missing required field");
        return node_.at(key);
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }

    double number(const std::string& key, double fallback, bool required = false) {
        if (!has(key)) {
            if (required) fail(at(key), "missing required field");
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        return v.get<double>();
    }

    std::size_t count(const std::string& key, std::size_t fallback, bool required = false) {
        if (!has(key)) {
            if (required) fail(at(key), "missing required field");
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            fail(at(key), "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    std::string text(const std::string& key, std::string fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, bool required) {
        std::vector<double> out;
        if (!has(key)) {
            if (required) fail(at(key), "missing required field");
            return out;
        }
        const json& v = node_.at(key);
        if (!v.is_array()) fail(at(key), "expected an array");
        for (const auto& item : v) {
            if (!item.is_number()) fail(at(key), "expected an array of numbers");
            out.push_back(item.get<double>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key, bool required) {
        std::vector<std::string> out;
        if (!has(key)) {
            if (required) fail(at(key), "missing required field");
            return out;
        }
        const json& v = node_.at(key);
        if (!v.is_array()) fail(at(key), "expected an array");
        for (const auto& item : v) {
            if (!item.is_string()) fail(at(key), "expected an array of strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.contains(key)) fail(at(key), "unknown field");
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) Reader::fail(path, what);
}

Envelope parse_envelope(const json& node, const std::string& path) {
    Reader r(node, path);
    const std::string kind = r.text("kind", "");
    Envelope env = Envelope::constant(0.0);
    if (kind == "constant") {
        env = Envelope::constant(r.number("value", 0.0, true));
    } else if (kind == "polynomial") {
        const auto c = r.numbers("coefficients", true);
        require(!c.empty(), r.at("coefficients"), "must be nonempty");
        env = Envelope::polynomial(c);
    } else if (kind == "sine") {
        env = Envelope::sine(r.number("amplitude", 0.0, true), r.number("omega", 0.0, true),
                             r.number("phase", 0.0));
    } else if (kind == "exponential") {
        env = Envelope::exponential(r.number("amplitude", 0.0, true), r.number("rate", 0.0, true));
    } else {
        Reader::fail(path + ".kind", "expected constant, polynomial, sine or exponential");
    }
    r.reject_unknown();
    return env;
}

std::vector<ShiftSpec> parse_shifts(const json& node, const std::string& path, double horizon) {
    require(node.is_array(), path, "expected an array");
    std::vector<ShiftSpec> out;
    std::set<std::string> names;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        Reader r(node[i], p);
        ShiftSpec spec;
        spec.name = r.text("name", "");
        require(!spec.name.empty(), p + ".name", "missing or empty");
        require(names.insert(spec.name).second, p + ".name", "duplicate shift name");
        const json& modes = r.raw("modes");
        require(modes.is_array(), p + ".modes", "expected an array");
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const std::string mp = p + ".modes[" + std::to_string(m) + "]";
            Reader mr(modes[m], mp);
            const std::size_t n = mr.count("n", 0, true);
            const Envelope env = parse_envelope(mr.raw("envelope"), mp + ".envelope");
            mr.reject_unknown();
            spec.modes.push_back({n, env});
        }
        r.reject_unknown();
        try {
            ShiftField(horizon, spec.modes);
        } catch (const std::exception& e) {
            Reader::fail(p, e.what());
        }
        out.push_back(std::move(spec));
    }
    return out;
}

void check_names(const std::vector<std::string>& names, const std::string& path, bool windows) {
    for (const auto& n : names) {
        try {
            if (windows) {
                window_registry(n);
            } else {
                registry(n);
            }
        } catch (const UnknownNameError& e) {
            Reader::fail(path, e.what());
        }
    }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ScenarioConfig c;
    Reader r(root, "$");
    c.schema_version = static_cast<int>(r.count("schema_version", 0, true));
    require(c.schema_version == kConfigSchemaVersion, "$.schema_version",
            "unsupported schema version " + std::to_string(c.schema_version) + " (expected " +
                std::to_string(kConfigSchemaVersion) + ")");

    {
        Reader b(r.raw("basis"), "$.basis");
        c.n_modes = b.count("n_modes", 0, true);
        c.kappa = b.number("kappa", 0.5);
        b.reject_unknown();
        require(c.n_modes >= 1, "$.basis.n_modes", "must be >= 1");
        require(c.kappa > 0.0, "$.basis.kappa", "must be positive");
    }
    c.horizon = r.number("horizon", 0.0, true);
    require(c.horizon > 0.0, "$.horizon", "must be positive");

    c.observables = r.strings("observables", true);
    require(!c.observables.empty(), "$.observables", "must be nonempty");
    check_names(c.observables, "$.observables", false);
    c.windows = r.strings("windows", true);
    require(!c.windows.empty(), "$.windows", "must be nonempty");
    check_names(c.windows, "$.windows", true);
    c.shift_fields = parse_shifts(r.raw("shift_fields"), "$.shift_fields", c.horizon);
    require(!c.shift_fields.empty(), "$.shift_fields", "must be nonempty");
    for (const auto& s : c.shift_fields) {
        for (const auto& m : s.modes) {
            require(m.n <= c.n_modes, "$.shift_fields." + s.name, "mode index exceeds basis.n_modes");
        }
    }
    c.times = r.numbers("times", true);
    require(!c.times.empty(), "$.times", "must be nonempty");
    for (const double t : c.times) require(t > 0.0 && t <= c.horizon, "$.times", "entries must lie in (0, horizon]");

    if (r.has("quadrature")) {
        Reader q(r.raw("quadrature"), "$.quadrature");
        c.quadrature.hermite_order = q.count("hermite_order", c.quadrature.hermite_order);
        c.quadrature.legendre_points = q.count("legendre_points", c.quadrature.legendre_points);
        c.quadrature.stieltjes_K = q.count("stieltjes_K", c.quadrature.stieltjes_K);
        c.quadrature.panel_points = q.count("panel_points", c.quadrature.panel_points);
        q.reject_unknown();
        require(c.quadrature.hermite_order >= 2, "$.quadrature.hermite_order", "must be >= 2");
        require(c.quadrature.legendre_points >= 2, "$.quadrature.legendre_points", "must be >= 2");
        require(c.quadrature.stieltjes_K >= 1, "$.quadrature.stieltjes_K", "must be >= 1");
        require(c.quadrature.panel_points >= 1, "$.quadrature.panel_points", "must be >= 1");
    }

    {
        Reader m(r.raw("mc"), "$.mc");
        c.mc.scheme = m.text("scheme", c.mc.scheme);
        try {
            parse_scheme(c.mc.scheme);
        } catch (const UnknownNameError& e) {
            Reader::fail("$.mc.scheme", e.what());
        }
        c.mc.delta = m.number("delta", c.mc.delta);
        c.mc.n_samples = m.count("n_samples", c.mc.n_samples);
        if (m.has("seed")) {
            const json& s = m.raw("seed");
            require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0), "$.mc.seed",
                    "expected a non-negative integer");
            c.mc.seed = s.get<std::uint64_t>();
        }
        c.mc.n_modes = m.count("n_modes", c.mc.n_modes);
        c.mc.shift = m.text("shift", c.mc.shift);
        if (m.has("spot_checks")) {
            const json& spots = m.raw("spot_checks");
            require(spots.is_array(), "$.mc.spot_checks", "expected an array");
            for (std::size_t i = 0; i < spots.size(); ++i) {
                const std::string p = "$.mc.spot_checks[" + std::to_string(i) + "]";
                Reader s(spots[i], p);
                SpotCheck sc;
                sc.observable = s.text("observable", "");
                sc.t = s.number("t", 0.0, true);
                sc.x = s.number("x", 0.0, true);
                s.reject_unknown();
                check_names({sc.observable}, p + ".observable", false);
                require(sc.t > 0.0 && sc.t <= c.horizon, p + ".t", "must lie in (0, horizon]");
                require(sc.x >= 0.0 && sc.x <= 1.0, p + ".x", "must lie in [0, 1]");
                c.mc.spot_checks.push_back(sc);
            }
        }
        m.reject_unknown();
        require(c.mc.delta > 0.0 && c.mc.delta <= c.horizon, "$.mc.delta", "must lie in (0, horizon]");
        require(c.mc.n_samples >= 2, "$.mc.n_samples", "must be >= 2");
        require(c.mc.n_modes >= 1, "$.mc.n_modes", "must be >= 1");
        require(!c.mc.spot_checks.empty(), "$.mc.spot_checks", "must be nonempty");
    }

    {
        Reader p(r.raw("pathwise"), "$.pathwise");
        c.pathwise.epsilon = p.number("epsilon", c.pathwise.epsilon);
        c.pathwise.n_samples = p.count("n_samples", c.pathwise.n_samples);
        c.pathwise.n_modes = p.count("n_modes", c.pathwise.n_modes);
        c.pathwise.legendre_points = p.count("legendre_points", c.pathwise.legendre_points);
        c.pathwise.delta_ladder = p.numbers("delta_ladder", true);
        c.pathwise.observable = p.text("observable", c.pathwise.observable);
        c.pathwise.window = p.text("window", c.pathwise.window);
        p.reject_unknown();
        require(c.pathwise.epsilon > 0.0, "$.pathwise.epsilon", "must be positive");
        require(c.pathwise.n_samples >= 2, "$.pathwise.n_samples", "must be >= 2");
        require(c.pathwise.n_modes >= 1, "$.pathwise.n_modes", "must be >= 1");
        require(c.pathwise.legendre_points >= 2, "$.pathwise.legendre_points", "must be >= 2");
        require(c.pathwise.delta_ladder.size() >= 2, "$.pathwise.delta_ladder", "needs at least two entries");
        for (std::size_t i = 0; i < c.pathwise.delta_ladder.size(); ++i) {
            const double d = c.pathwise.delta_ladder[i];
            require(d > 0.0 && d <= c.horizon, "$.pathwise.delta_ladder", "entries must lie in (0, horizon]");
            require(i == 0 || d < c.pathwise.delta_ladder[i - 1], "$.pathwise.delta_ladder",
                    "must be strictly decreasing");
        }
        check_names({c.pathwise.observable}, "$.pathwise.observable", false);
        check_names({c.pathwise.window}, "$.pathwise.window", true);
    }

    if (r.has("kernel")) {
        Reader k(r.raw("kernel"), "$.kernel");
        c.kernel.n_random = k.count("n_random", c.kernel.n_random);
        c.kernel.stationary_n_modes = k.count("stationary_n_modes", c.kernel.stationary_n_modes);
        k.reject_unknown();
        require(c.kernel.n_random >= 1, "$.kernel.n_random", "must be >= 1");
        require(c.kernel.stationary_n_modes >= 1, "$.kernel.stationary_n_modes", "must be >= 1");
    }

    c.epsilon_ladder = r.numbers("epsilon_ladder", true);
    require(c.epsilon_ladder.size() >= 2, "$.epsilon_ladder", "needs at least two entries");
    for (std::size_t i = 0; i < c.epsilon_ladder.size(); ++i) {
        const double e = c.epsilon_ladder[i];
        require(e > 0.0 && e <= 0.1, "$.epsilon_ladder", "entries must lie in (0, 0.1]");
        require(i == 0 || e < c.epsilon_ladder[i - 1], "$.epsilon_ladder", "must be strictly decreasing");
    }

    if (r.has("renorm")) {
        Reader q(r.raw("renorm"), "$.renorm");
        c.renorm.n_modes = q.count("n_modes", c.renorm.n_modes);
        c.renorm.t = q.number("t", c.renorm.t);
        c.renorm.x_divergent = q.number("x_divergent", c.renorm.x_divergent);
        c.renorm.x_renormalized = q.number("x_renormalized", c.renorm.x_renormalized);
        c.renorm.table_observable = q.text("table_observable", c.renorm.table_observable);
        c.renorm.table_window = q.text("table_window", c.renorm.table_window);
        c.renorm.table_shift = q.text("table_shift", c.renorm.table_shift);
        q.reject_unknown();
        require(c.renorm.n_modes >= 1, "$.renorm.n_modes", "must be >= 1");
        require(c.renorm.t > 0.0 && c.renorm.t <= c.horizon, "$.renorm.t", "must lie in (0, horizon]");
        require(c.renorm.x_divergent >= 0.0 && c.renorm.x_divergent <= 1.0, "$.renorm.x_divergent",
                "must lie in [0, 1]");
        require(c.renorm.x_renormalized >= 0.0 && c.renorm.x_renormalized <= 1.0, "$.renorm.x_renormalized",
                "must lie in [0, 1]");
        check_names({c.renorm.table_observable}, "$.renorm.table_observable", false);
        check_names({c.renorm.table_window}, "$.renorm.table_window", true);
    }

    if (r.has("hida")) {
        Reader h(r.raw("hida"), "$.hida");
        c.hida.n_modes = h.count("n_modes", c.hida.n_modes);
        c.hida.resolution = h.count("resolution", c.hida.resolution);
        c.hida.t = h.number("t", c.hida.t);
        c.hida.x = h.number("x", c.hida.x);
        h.reject_unknown();
        require(c.hida.n_modes >= 1, "$.hida.n_modes", "must be >= 1");
        require(c.hida.resolution >= 1, "$.hida.resolution", "must be >= 1");
        require(c.hida.t > 0.0 && c.hida.t <= c.horizon, "$.hida.t", "must lie in (0, horizon]");
        require(c.hida.x > 0.0 && c.hida.x < 1.0, "$.hida.x", "must lie in (0, 1)");
    }

    c.tolerances = default_tolerances();
    if (r.has("tolerances")) {
        const json& tol = r.raw("tolerances");
        require(tol.is_object(), "$.tolerances", "expected an object");
        for (const auto& [key, value] : tol.items()) {
            const std::string p = "$.tolerances." + key;
            require(c.tolerances.contains(key), p, "unknown tolerance");
            require(value.is_number(), p, "expected a number");
            require(value.get<double>() > 0.0, p, "must be positive");
            c.tolerances[key] = value.get<double>();
        }
    }

    if (r.has("outputs")) {
        Reader o(r.raw("outputs"), "$.outputs");
        c.outputs.directory = o.text("directory", c.outputs.directory);
        c.outputs.format = o.text("format", c.outputs.format);
        o.reject_unknown();
        require(!c.outputs.directory.empty(), "$.outputs.directory", "must be nonempty");
        require(c.outputs.format == "csv" || c.outputs.format == "json", "$.outputs.format",
                "expected csv or json");
    }
    r.reject_unknown();

    // Cross references between sections.
    auto shift_exists = [&](const std::string& name) {
        for (const auto& s : c.shift_fields) {
            if (s.name == name) return true;
        }
        return false;
    };
    require(shift_exists(c.mc.shift), "$.mc.shift", "no shift field named '" + c.mc.shift + "'");
    require(shift_exists(c.renorm.table_shift), "$.renorm.table_shift",
            "no shift field named '" + c.renorm.table_shift + "'");
    const ShiftField mc_shift = c.shift(c.mc.shift);
    for (const auto& m : mc_shift.modes()) {
        require(m.n <= c.mc.n_modes, "$.mc.shift", "mode index exceeds mc.n_modes");
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace spdeito
