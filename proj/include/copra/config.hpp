#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "copra/array.hpp"
#include "copra/beamformers.hpp"
#include "copra/secular.hpp"

namespace copra {

enum class SinrAggregation { Linear, Decibel };

/// Everything needed to reproduce an experiment. Defaults follow the
/// ten-element, two-interferer, 30-snapshot simulation setup.
struct ExperimentConfig {
    int n_elements = 10;
    double spacing_wavelengths = 0.5;
    int n_interferers = 2;
    double inr_db = 30.0;
    double soi_error_bound_deg = 5.0;
    double interferer_guard_deg = 2.0;
    int trials = 1000;
    int n_snapshots = 30;
    // Fixed SNR for trials and for the snapshot sweep.
    double snr_db = 20.0;
    std::vector<double> snr_db_grid = {-10, -5, 0, 5, 10, 15, 20, 25, 30};
    std::vector<int> snapshot_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    double rho = 0.1;
    // The optimal beamformer is always evaluated in addition to these.
    std::vector<Method> methods = {Method::SampleMvdr, Method::DiagonalLoading, Method::Copra,
                                   Method::QuasiRls};
    std::uint64_t seed = 1;
    // 0 picks the hardware concurrency.
    int workers = 0;
    // Loading level of the diagonal-loading baseline, linear (noise power is 1).
    double diagonal_loading = 10.0;
    QuasiGrid quasi_grid;
    GammaZPolicy gamma_z_policy = GammaZPolicy::Averaged;
    SinrAggregation sinr_aggregation = SinrAggregation::Linear;

    bool operator==(const ExperimentConfig&) const = default;

    // Throws ConfigError naming the first offending field.
    void validate() const;

    ScenarioConfig scenario() const;
    CopraOptions copra_options() const;
    bool enabled(Method m) const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a JSON config document. Missing keys keep their defaults; unknown
/// keys and invalid values raise ConfigError. Parse errors carry the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const ExperimentConfig& cfg);

std::string_view policy_name(GammaZPolicy p);
std::string_view aggregation_name(SinrAggregation a);

}  // namespace copra
