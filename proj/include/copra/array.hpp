#pragma once

#include <vector>

#include "copra/linalg.hpp"
#include "copra/random.hpp"

namespace copra {

struct ArrayGeometry {
    int n_elements = 10;
    double spacing_wavelengths = 0.5;

    void validate() const;
};

/// Narrowband ULA response to a plane wave from `doa_deg` (broadside = 0).
/// Element p is exp(i 2 pi d p sin(theta)). Throws std::invalid_argument
/// outside [-90, 90] degrees.
ComplexVector steering_vector(const ArrayGeometry& geometry, double doa_deg);

// Parameters of the random scenario generator. Powers are in dB relative
// to the unit noise power.
struct ScenarioConfig {
    ArrayGeometry geometry;
    int n_interferers = 2;
    double snr_db = 20.0;
    double inr_db = 30.0;
    double error_bound_deg = 5.0;
    // Interferers closer than this to the signal of interest are redrawn.
    double interferer_guard_deg = 2.0;

    void validate() const;
};

struct Scenario {
    ArrayGeometry geometry;
    double soi_doa_deg = 0.0;
    double soi_error_deg = 0.0;
    std::vector<double> interferer_doas_deg;
    double soi_power = 1.0;
    std::vector<double> interferer_powers;
    double noise_power = 1.0;
    ComplexVector a_true;
    ComplexVector a_presumed;
};

/// Builds a scenario from explicit angles and linear powers.
Scenario make_scenario(const ArrayGeometry& geometry, double soi_doa_deg, double soi_error_deg,
                       std::vector<double> interferer_doas_deg, double soi_power,
                       std::vector<double> interferer_powers, double noise_power = 1.0);

/// Draws DOAs uniformly on [-90, 90], the look-direction error uniformly on
/// [-bound, bound], and fixes the noise power at 1.
Scenario draw_scenario(RandomStream& rng, const ScenarioConfig& cfg);

// Column t holds snapshot y[t].
struct SnapshotSet {
    ComplexMatrix snapshots;

    Eigen::Index n_elements() const { return snapshots.rows(); }
    Eigen::Index n_snapshots() const { return snapshots.cols(); }
};

SnapshotSet synthesize_snapshots(const Scenario& scenario, int n_snapshots, RandomStream& rng);

// (1/n_s) sum_t y[t] y[t]^H
ComplexMatrix sample_covariance(const SnapshotSet& s);

// sum_k p_k a_k a_k^H + noise_power I
ComplexMatrix interference_noise_covariance(const Scenario& scenario);

// Interference-plus-noise covariance plus the signal-of-interest term.
ComplexMatrix true_covariance(const Scenario& scenario);

}  // namespace copra
