#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spdeito/spectral_kernel.hpp"

namespace spdeito {

inline constexpr int kConfigSchemaVersion = 1;

struct ShiftSpec {
    std::string name;
    std::vector<ShiftMode> modes;
};

struct QuadratureConfig {
    std::size_t hermite_order = 64;
    std::size_t legendre_points = 512;
    std::size_t stieltjes_K = 256;
    std::size_t panel_points = 4;
};

struct SpotCheck {
    std::string observable;
    double t = 0.5;
    double x = 0.5;
};

struct McConfig {
    std::string scheme = "exp_euler";
    double delta = 0.0009765625;
    std::size_t n_samples = 20000;
    std::uint64_t seed = 20240917;
    std::size_t n_modes = 32;
    std::string shift = "single";
    std::vector<SpotCheck> spot_checks;
};

struct PathwiseConfig {
    double epsilon = 0.01;
    std::size_t n_samples = 1000;
    std::size_t n_modes = 24;
    std::size_t legendre_points = 64;
    std::vector<double> delta_ladder;
    std::string observable = "tanh";
    std::string window = "poly_bump";
};

struct KernelCheckConfig {
    std::size_t n_random = 20;
    std::size_t stationary_n_modes = 262144;
};

struct RenormConfig {
    std::size_t n_modes = 1024;
    double t = 0.5;
    double x_divergent = 0.5;
    double x_renormalized = 0.37;
    std::string table_observable = "tanh";
    std::string table_window = "poly_bump";
    std::string table_shift = "two_mode";
};

struct HidaConfig {
    std::size_t n_modes = 256;
    std::size_t resolution = 4096;
    double t = 0.5;
    double x = 0.5;
};

struct OutputConfig {
    std::string directory = "reports";
    std::string format = "csv";
};

/// Run configuration for every suite, validated on load.
struct ScenarioConfig {
    int schema_version = kConfigSchemaVersion;
    std::size_t n_modes = 128;
    double kappa = 0.5;
    double horizon = 1.0;
    std::vector<std::string> observables;
    std::vector<std::string> windows;
    std::vector<ShiftSpec> shift_fields;
    std::vector<double> times;
    QuadratureConfig quadrature;
    McConfig mc;
    PathwiseConfig pathwise;
    KernelCheckConfig kernel;
    std::vector<double> epsilon_ladder;
    RenormConfig renorm;
    HidaConfig hida;
    std::map<std::string, double> tolerances;
    OutputConfig outputs;

    /// Configured tolerance; throws ConfigError for an unknown key.
    double tolerance(const std::string& key) const;
    ShiftField shift(const std::string& name) const;
};

/// Tolerance keys with their defaults.
const std::map<std::string, double>& default_tolerances();

/// Parses and validates; throws ConfigError with the offending field path.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

}  // namespace spdeito
