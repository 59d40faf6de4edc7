#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copra/beamformers.hpp"
#include "copra/config.hpp"
#include "copra/secular.hpp"

namespace copra {

/// Output SINR sigma_s^2 |w^H a|^2 / (w^H C_{i+n} w) against the true
/// steering vector, linear scale.
double output_sinr(const BeamformerWeights& w, const Scenario& scenario);
double output_sinr(const BeamformerWeights& w, const Scenario& scenario,
                   const ComplexMatrix& interference_noise);

inline constexpr std::size_t kMethodCount = kAllMethods.size();

constexpr std::size_t method_index(Method m) {
    return static_cast<std::size_t>(m);
}

struct TrialRecord {
    std::uint64_t trial_index = 0;
    // Linear SINR per method, indexed by method_index(); empty when the
    // method is disabled or failed (see `failure`).
    std::array<std::optional<double>, kMethodCount> sinr{};
    std::array<std::string, kMethodCount> failure{};

    double gamma_b = 0;
    double gamma_z = 0;
    bool gamma_b_fallback = false;
    bool gamma_z_fallback = false;
    CopraDiagnostics copra;
    int n1 = 0;
    int n2 = 0;
    double quasi_gamma_b = 0;
    double quasi_gamma_z = 0;
    // Sample MVDR needed the minimal loading because the sample covariance
    // was numerically singular.
    bool mvdr_loaded = false;

    double soi_doa_deg = 0;
    double soi_error_deg = 0;
    std::vector<double> interferer_doas_deg;

    bool method_fell_back(Method m) const;
};

/// One Monte-Carlo trial at cfg.snr_db and cfg.n_snapshots. The random
/// stream depends only on (master_seed, trial_index).
TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index,
                      std::uint64_t master_seed);

/// Runs trials [0, cfg.trials) on `workers` threads (0 = hardware
/// concurrency). Records are returned in trial order.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, std::uint64_t master_seed,
                                    int workers);

enum class SweepKind { Snr, Snapshots };

std::string_view sweep_kind_name(SweepKind k);

struct SweepSpec {
    SweepKind kind = SweepKind::Snr;
    std::vector<double> values;

    // Grid taken from the config for the given kind.
    static SweepSpec from_config(const ExperimentConfig& cfg, SweepKind kind);
};

struct MethodStats {
    bool enabled = false;
    int count = 0;
    double mean_sinr_db = 0;
    double stderr_db = 0;
    double fallback_rate = 0;
};

struct SweepPoint {
    double value = 0;
    std::array<MethodStats, kMethodCount> methods{};
    double gamma_b_fallback_rate = 0;
    double gamma_z_fallback_rate = 0;
};

struct SweepResult {
    SweepKind kind = SweepKind::Snr;
    std::vector<SweepPoint> points;
    int trials = 0;
    std::uint64_t seed = 0;
    ExperimentConfig config;
};

/// Aggregates one sweep point. Linear aggregation averages SINR in linear
/// units and converts the mean to dB; the standard error is mapped through
/// the same conversion to first order.
SweepPoint aggregate(double value, const std::vector<TrialRecord>& records,
                     const ExperimentConfig& cfg);

SweepResult run_sweep(const ExperimentConfig& cfg, const SweepSpec& spec,
                      std::uint64_t master_seed);

}  // namespace copra
