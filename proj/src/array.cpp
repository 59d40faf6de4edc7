#include "copra/array.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace copra {

namespace {

double deg_to_rad(double deg) {
    return deg * std::numbers::pi / 180.0;
}

double db_to_linear(double db) {
    return std::pow(10.0, db / 10.0);
}

ComplexVector ula_manifold(const ArrayGeometry& geometry, double doa_deg) {
    const double phase_step =
        2.0 * std::numbers::pi * geometry.spacing_wavelengths * std::sin(deg_to_rad(doa_deg));
    ComplexVector a(geometry.n_elements);
    for (int p = 0; p < geometry.n_elements; ++p)
        a(p) = std::polar(1.0, phase_step * p);
    return a;
}

}  // namespace

void ArrayGeometry::validate() const {
    if (n_elements < 2)
        throw std::invalid_argument("array geometry: n_elements must be at least 2");
    if (!(spacing_wavelengths > 0.0) || !std::isfinite(spacing_wavelengths))
        throw std::invalid_argument("array geometry: spacing_wavelengths must be positive");
}

ComplexVector steering_vector(const ArrayGeometry& geometry, double doa_deg) {
    geometry.validate();
    if (!(doa_deg >= -90.0 && doa_deg <= 90.0))
        throw std::invalid_argument("steering_vector: angle " + std::to_string(doa_deg) +
                                    " outside [-90, 90] degrees");
    return ula_manifold(geometry, doa_deg);
}

void ScenarioConfig::validate() const {
    geometry.validate();
    if (n_interferers < 0)
        throw std::invalid_argument("scenario config: n_interferers must be non-negative");
    if (!std::isfinite(snr_db) || !std::isfinite(inr_db))
        throw std::invalid_argument("scenario config: SNR and INR must be finite");
    if (!(error_bound_deg >= 0.0) || !std::isfinite(error_bound_deg))
        throw std::invalid_argument("scenario config: error bound must be non-negative");
    if (!(interferer_guard_deg >= 0.0) || interferer_guard_deg >= 90.0)
        throw std::invalid_argument("scenario config: interferer guard must lie in [0, 90)");
}

Scenario make_scenario(const ArrayGeometry& geometry, double soi_doa_deg, double soi_error_deg,
                       std::vector<double> interferer_doas_deg, double soi_power,
                       std::vector<double> interferer_powers, double noise_power) {
    if (interferer_doas_deg.size() != interferer_powers.size())
        throw std::invalid_argument("make_scenario: one power per interferer required");
    if (!(soi_power >= 0.0) || !(noise_power > 0.0))
        throw std::invalid_argument("make_scenario: invalid signal or noise power");
    for (double p : interferer_powers)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("make_scenario: interferer powers must be finite and non-negative");

    Scenario s;
    s.geometry = geometry;
    s.soi_doa_deg = soi_doa_deg;
    s.soi_error_deg = soi_error_deg;
    s.interferer_doas_deg = std::move(interferer_doas_deg);
    s.soi_power = soi_power;
    s.interferer_powers = std::move(interferer_powers);
    s.noise_power = noise_power;
    s.a_true = steering_vector(geometry, soi_doa_deg);
    // The error may push the presumed direction past endfire; the manifold
    // is evaluated at the raw angle, which folds back through sin(theta).
    s.a_presumed = ula_manifold(geometry, soi_doa_deg + soi_error_deg);
    return s;
}

Scenario draw_scenario(RandomStream& rng, const ScenarioConfig& cfg) {
    cfg.validate();
    const double soi = rng.uniform(-90.0, 90.0);
    std::vector<double> doas;
    doas.reserve(static_cast<std::size_t>(cfg.n_interferers));
    while (static_cast<int>(doas.size()) < cfg.n_interferers) {
        const double doa = rng.uniform(-90.0, 90.0);
        if (std::abs(doa - soi) >= cfg.interferer_guard_deg)
            doas.push_back(doa);
    }
    const double error = rng.uniform(-cfg.error_bound_deg, cfg.error_bound_deg);
    std::vector<double> powers(doas.size(), db_to_linear(cfg.inr_db));
    return make_scenario(cfg.geometry, soi, error, std::move(doas), db_to_linear(cfg.snr_db),
                         std::move(powers), 1.0);
}

SnapshotSet synthesize_snapshots(const Scenario& scenario, int n_snapshots, RandomStream& rng) {
    if (n_snapshots < 1)
        throw std::invalid_argument("synthesize_snapshots: need at least one snapshot");
    const Eigen::Index ne = scenario.a_true.size();
    std::vector<ComplexVector> interferers;
    for (double doa : scenario.interferer_doas_deg)
        interferers.push_back(steering_vector(scenario.geometry, doa));

    const double soi_amp = std::sqrt(scenario.soi_power);
    const double noise_amp = std::sqrt(scenario.noise_power);
    SnapshotSet set{ComplexMatrix(ne, n_snapshots)};
    for (int t = 0; t < n_snapshots; ++t) {
        ComplexVector y = (soi_amp * rng.complex_normal()) * scenario.a_true;
        for (std::size_t k = 0; k < interferers.size(); ++k)
            y += (std::sqrt(scenario.interferer_powers[k]) * rng.complex_normal()) * interferers[k];
        for (Eigen::Index p = 0; p < ne; ++p)
            y(p) += noise_amp * rng.complex_normal();
        set.snapshots.col(t) = y;
    }
    return set;
}

ComplexMatrix sample_covariance(const SnapshotSet& s) {
    if (s.n_snapshots() < 1 || s.n_elements() < 1)
        throw std::invalid_argument("sample_covariance: empty snapshot set");
    ComplexMatrix c = s.snapshots * s.snapshots.adjoint() / static_cast<double>(s.n_snapshots());
    // Exact Hermitian symmetry regardless of summation order.
    return 0.5 * (c + c.adjoint());
}

ComplexMatrix interference_noise_covariance(const Scenario& scenario) {
    const Eigen::Index ne = scenario.a_true.size();
    ComplexMatrix c = scenario.noise_power * ComplexMatrix::Identity(ne, ne);
    for (std::size_t k = 0; k < scenario.interferer_doas_deg.size(); ++k) {
        const ComplexVector a = steering_vector(scenario.geometry, scenario.interferer_doas_deg[k]);
        c += scenario.interferer_powers[k] * (a * a.adjoint());
    }
    return c;
}

ComplexMatrix true_covariance(const Scenario& scenario) {
    return interference_noise_covariance(scenario) +
           scenario.soi_power * (scenario.a_true * scenario.a_true.adjoint());
}

}  // namespace copra
