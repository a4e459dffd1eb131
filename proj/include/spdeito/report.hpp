#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdeito {

enum class MetricKind {
    /// Reproducible to the last bit; compared exactly unless a tolerance is given.
    deterministic,
    /// Monte Carlo estimate with a standard error; compared within a band of standard errors.
    monte_carlo,
};

struct ReportRow {
    std::string suite;
    std::string scenario;
    std::string metric;
    double value = 0.0;
    /// Standard error for Monte Carlo rows; NaN when not applicable.
    double uncertainty = 0.0;
    /// Bound the pass flag was computed against; NaN for informational rows.
    double tolerance = 0.0;
    bool pass = true;
    MetricKind kind = MetricKind::deterministic;
    /// Free-form key=value pairs separated by ';'.
    std::string metadata;
};

/// Ordered, append-only collection of rows from one suite run.
class Report {
public:
    explicit Report(std::string suite) : suite_(std::move(suite)) {}

    const std::string& suite() const { return suite_; }
    const std::vector<ReportRow>& rows() const { return rows_; }

    void add(ReportRow row);
    /// Adds a row whose pass flag is `pass`.
    void check(const std::string& scenario, const std::string& metric, double value, double tolerance,
               bool pass, const std::string& metadata = "");
    /// Informational row, always passing.
    void info(const std::string& scenario, const std::string& metric, double value,
              const std::string& metadata = "");
    void estimate(const std::string& scenario, const std::string& metric, double value,
                  double std_error, double tolerance, bool pass, const std::string& metadata = "");

    bool all_pass() const;
    std::vector<ReportRow> failures() const;

    /// Columns: suite,scenario,metric,value,uncertainty,tolerance,pass,kind,metadata.
    std::string to_csv() const;
    /// {"suite": ..., "rows": [{...}]} with the same keys as the CSV columns.
    std::string to_json() const;

private:
    std::string suite_;
    std::vector<ReportRow> rows_;
};

const std::vector<std::string>& report_columns();

/// Parses text written by Report::to_csv.
std::vector<ReportRow> parse_report_csv(const std::string& text);

class GoldenMissingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GoldenShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GoldenTolerances {
    /// Absolute tolerance for deterministic metrics; 0 requires an exact match.
    double deterministic = 0.0;
    /// Band half-width in standard errors for Monte Carlo metrics.
    double mc_sigma = 3.0;
    /// Per-metric overrides of `deterministic`, keyed by metric name.
    std::map<std::string, double> per_metric;
};

struct GoldenDiff {
    std::string scenario;
    std::string metric;
    double expected = 0.0;
    double actual = 0.0;
    double allowed = 0.0;
};

struct DiffSummary {
    std::vector<GoldenDiff> diffs;
    bool empty() const { return diffs.empty(); }
    std::string to_text() const;
};

/// Compares a report against a golden CSV row by row.
///
/// Rows must match in count, order, scenario, metric and kind (GoldenShapeError otherwise);
/// a missing golden file raises GoldenMissingError.
DiffSummary golden_compare(const Report& report, const std::string& golden_path,
                           const GoldenTolerances& tolerances = {});
DiffSummary golden_compare(const std::vector<ReportRow>& actual, const std::vector<ReportRow>& golden,
                           const GoldenTolerances& tolerances = {});

}  // namespace spdeito
