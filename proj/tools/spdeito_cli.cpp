// Command-line runner for the verification suites.
//
// Exit status: 0 all checks pass, 1 failing checks, 2 configuration or usage error,
// 3 numerical resolution error, 4 missing golden file, 5 golden shape mismatch,
// 6 golden value mismatch.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdeito/errors.hpp"
#include "spdeito/report.hpp"
#include "spdeito/scenario_config.hpp"
#include "spdeito/suites.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kResolution = 3, kGoldenMissing = 4, kGoldenShape = 5, kGoldenDiff = 6 };

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification suites for the Ito-type formula of the stochastic heat equation"};
    std::string config_path;
    std::vector<std::string> suites;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format;
    std::string golden_dir;
    double golden_tol = 0.0;
    double golden_sigma = 3.0;
    std::size_t workers = 1;
    bool list = false;

    app.add_option("--config", config_path, "scenario configuration (JSON)");
    app.add_option("--suite", suites, "suite name, repeatable; 'all' runs every suite");
    app.add_option("--seed", seed, "override mc.seed");
    app.add_option("--out", out_dir, "output directory (overrides SPDEITO_OUT_DIR and the config)");
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--golden", golden_dir, "directory with golden <suite>.csv reports to compare against");
    app.add_option("--golden-tol", golden_tol, "absolute tolerance for deterministic golden metrics")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--golden-sigma", golden_sigma, "band in standard errors for Monte Carlo golden metrics")
        ->check(CLI::PositiveNumber);
    app.add_flag("--list-suites", list, "list suite names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (list) {
        for (const auto& name : spdeito::suite_names()) {
            std::cout << name << "  " << spdeito::suite_description(name) << '\n';
        }
        return kOk;
    }
    if (config_path.empty() || suites.empty()) {
        std::cerr << "error: --config and --suite are required (see --help)\n";
        return kConfig;
    }
    if (suites.size() == 1 && suites.front() == "all") suites = spdeito::suite_names();
    for (const auto& s : suites) {
        const auto& names = spdeito::suite_names();
        if (std::find(names.begin(), names.end(), s) == names.end()) {
            std::cerr << "error: unknown suite '" << s << "'\n";
            return kConfig;
        }
    }

    spdeito::ScenarioConfig config;
    try {
        config = spdeito::load_config(config_path);
    } catch (const spdeito::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }
    if (seed) config.mc.seed = *seed;
    if (!format.empty()) config.outputs.format = format;
    std::string directory = config.outputs.directory;
    if (const char* env = std::getenv("SPDEITO_OUT_DIR"); env != nullptr && *env != '\0') directory = env;
    if (!out_dir.empty()) directory = out_dir;

    if (!golden_dir.empty()) {
        for (const auto& name : suites) {
            const auto path = std::filesystem::path(golden_dir) / (name + ".csv");
            if (!std::filesystem::exists(path)) {
                std::cerr << "golden error: golden file not found: " << path.string() << '\n';
                return kGoldenMissing;
            }
        }
    }

    int status = kOk;
    try {
        std::filesystem::create_directories(directory);
        for (const auto& name : suites) {
            const auto result = spdeito::run_suite(name, config, {workers});
            const auto& report = result.report;
            const std::filesystem::path base(directory);
            if (config.outputs.format == "json") {
                write_file(base / (name + ".json"), report.to_json());
            } else {
                write_file(base / (name + ".csv"), report.to_csv());
            }
            for (const auto& [file, content] : result.artifacts) write_file(base / file, content);

            const auto failures = report.failures();
            std::cout << name << ": " << report.rows().size() << " rows, " << failures.size() << " failed\n";
            for (const auto& f : failures) {
                std::cout << "  FAIL " << f.scenario << ' ' << f.metric << " value=" << f.value
                          << " tolerance=" << f.tolerance << '\n';
            }
            if (!failures.empty() && status == kOk) status = kFailed;

            if (!golden_dir.empty()) {
                spdeito::GoldenTolerances tol;
                tol.deterministic = golden_tol;
                tol.mc_sigma = golden_sigma;
                const auto diff = spdeito::golden_compare(
                    report, (std::filesystem::path(golden_dir) / (name + ".csv")).string(), tol);
                if (!diff.empty()) {
                    std::cout << name << ": golden mismatch\n" << diff.to_text();
                    if (status == kOk) status = kGoldenDiff;
                } else {
                    std::cout << name << ": golden match\n";
                }
            }
        }
    } catch (const spdeito::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const spdeito::ResolutionError& e) {
        std::cerr << "resolution error: " << e.what() << '\n';
        return kResolution;
    } catch (const spdeito::GoldenMissingError& e) {
        std::cerr << "golden error: " << e.what() << '\n';
        return kGoldenMissing;
    } catch (const spdeito::GoldenShapeError& e) {
        std::cerr << "golden error: " << e.what() << '\n';
        return kGoldenShape;
    }
    return status;
}
