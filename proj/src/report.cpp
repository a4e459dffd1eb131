#include "spdeito/report.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "spdeito/format.hpp"

namespace spdeito {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string kind_name(MetricKind k) { return k == MetricKind::deterministic ? "det" : "mc"; }

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& s) {
    if (s.empty()) return kNaN;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw GoldenShapeError("malformed number '" + s + "'");
    return v;
}

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

// Keeps the CSV free of separators and line breaks.
std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return out;
}

}  // namespace

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols{"suite", "scenario", "metric", "value", "uncertainty",
                                               "tolerance", "pass", "kind", "metadata"};
    return cols;
}

void Report::add(ReportRow row) {
    row.suite = suite_;
    rows_.push_back(std::move(row));
}

void Report::check(const std::string& scenario, const std::string& metric, double value,
                   double tolerance, bool pass, const std::string& metadata) {
    add({suite_, scenario, metric, value, kNaN, tolerance, pass, MetricKind::deterministic, metadata});
}

void Report::info(const std::string& scenario, const std::string& metric, double value,
                  const std::string& metadata) {
    add({suite_, scenario, metric, value, kNaN, kNaN, true, MetricKind::deterministic, metadata});
}

void Report::estimate(const std::string& scenario, const std::string& metric, double value,
                      double std_error, double tolerance, bool pass, const std::string& metadata) {
    add({suite_, scenario, metric, value, std_error, tolerance, pass, MetricKind::monte_carlo, metadata});
}

bool Report::all_pass() const {
    for (const auto& r : rows_) {
        if (!r.pass) return false;
    }
    return true;
}

std::vector<ReportRow> Report::failures() const {
    std::vector<ReportRow> out;
    for (const auto& r : rows_) {
        if (!r.pass) out.push_back(r);
    }
    return out;
}

std::string Report::to_csv() const {
    std::ostringstream os;
    const auto& cols = report_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : rows_) {
        os << sanitize(r.suite) << ',' << sanitize(r.scenario) << ',' << sanitize(r.metric) << ','
           << format_double(r.value) << ',' << (std::isnan(r.uncertainty) ? "" : format_double(r.uncertainty))
           << ',' << (std::isnan(r.tolerance) ? "" : format_double(r.tolerance)) << ','
           << (r.pass ? "true" : "false") << ',' << kind_name(r.kind) << ',' << sanitize(r.metadata)
           << '\n';
    }
    return os.str();
}

std::string Report::to_json() const {
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json rows = json::array();
    for (const auto& r : rows_) {
        rows.push_back({{"suite", r.suite},
                        {"scenario", r.scenario},
                        {"metric", r.metric},
                        {"value", num(r.value)},
                        {"uncertainty", num(r.uncertainty)},
                        {"tolerance", num(r.tolerance)},
                        {"pass", r.pass},
                        {"kind", kind_name(r.kind)},
                        {"metadata", r.metadata}});
    }
    return json{{"suite", suite_}, {"rows", rows}}.dump(2) + "\n";
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw GoldenShapeError("empty report");
    const auto header = split(line, ',');
    if (header != report_columns()) throw GoldenShapeError("unexpected report header '" + line + "'");
    std::vector<ReportRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != header.size()) {
            throw GoldenShapeError("line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        }
        ReportRow r;
        r.suite = f[0];
        r.scenario = f[1];
        r.metric = f[2];
        r.value = parse_number(f[3]);
        r.uncertainty = parse_number(f[4]);
        r.tolerance = parse_number(f[5]);
        if (f[6] != "true" && f[6] != "false") throw GoldenShapeError("line " + std::to_string(line_no) + ": bad pass flag");
        r.pass = f[6] == "true";
        if (f[7] != "det" && f[7] != "mc") throw GoldenShapeError("line " + std::to_string(line_no) + ": bad kind");
        r.kind = f[7] == "det" ? MetricKind::deterministic : MetricKind::monte_carlo;
        r.metadata = f[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string DiffSummary::to_text() const {
    std::ostringstream os;
    for (const auto& d : diffs) {
        os << d.scenario << ' ' << d.metric << ": expected " << format_double(d.expected) << ", got "
           << format_double(d.actual) << " (allowed " << format_double(d.allowed) << ")\n";
    }
    return os.str();
}

DiffSummary golden_compare(const std::vector<ReportRow>& actual, const std::vector<ReportRow>& golden,
                           const GoldenTolerances& tolerances) {
    if (actual.size() != golden.size()) {
        throw GoldenShapeError("row count differs: golden " + std::to_string(golden.size()) + ", report " +
                               std::to_string(actual.size()));
    }
    DiffSummary summary;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const auto& a = actual[i];
        const auto& g = golden[i];
        if (a.scenario != g.scenario || a.metric != g.metric || a.kind != g.kind) {
            throw GoldenShapeError("row " + std::to_string(i + 1) + " differs in key: golden '" + g.scenario +
                                   "/" + g.metric + "', report '" + a.scenario + "/" + a.metric + "'");
        }
        double allowed = tolerances.deterministic;
        if (const auto it = tolerances.per_metric.find(a.metric); it != tolerances.per_metric.end()) {
            allowed = it->second;
        }
        if (a.kind == MetricKind::monte_carlo && std::isfinite(g.uncertainty)) {
            allowed = tolerances.mc_sigma * g.uncertainty;
        }
        const bool ok = allowed == 0.0 ? same_value(a.value, g.value)
                                       : (same_value(a.value, g.value) || std::abs(a.value - g.value) <= allowed);
        if (!ok) summary.diffs.push_back({a.scenario, a.metric, g.value, a.value, allowed});
    }
    return summary;
}

DiffSummary golden_compare(const Report& report, const std::string& golden_path,
                           const GoldenTolerances& tolerances) {
    if (!std::filesystem::exists(golden_path)) throw GoldenMissingError("golden file not found: " + golden_path);
    std::ifstream in(golden_path);
    if (!in) throw GoldenMissingError("cannot read golden file: " + golden_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return golden_compare(report.rows(), parse_report_csv(buf.str()), tolerances);
}

}  // namespace spdeito
