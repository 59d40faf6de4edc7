#include "copra/beamformers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace copra {

namespace {

constexpr double kSingularRatio = 1e-12;

void check_steering(const HermitianEigensystem& es, const ComplexVector& a, const char* who) {
    if (a.size() != es.size())
        throw std::invalid_argument(std::string(who) + ": steering vector length mismatch");
    if (!(a.squaredNorm() > 0.0))
        throw std::invalid_argument(std::string(who) + ": steering vector is zero");
}

// Normalized Capon weights for the spectrum lambda + shift.
BeamformerWeights capon(const HermitianEigensystem& es, const ComplexVector& a, double shift,
                        Method tag) {
    const double lmin = es.min_eigenvalue() + shift;
    const double lmax = es.max_eigenvalue() + shift;
    if (!(lmin > kSingularRatio * lmax))
        throw NumericalError("mvdr_weights: covariance is numerically singular (min/max eigenvalue " +
                             std::to_string(lmax > 0 ? lmin / lmax : 0.0) + ")");
    const ComplexVector c_inv_a = apply_filtered(es, [shift](double l) { return 1.0 / (l + shift); }, a);
    const Complex denom = a.dot(c_inv_a);
    BeamformerWeights out;
    out.w = c_inv_a / denom.real();
    out.method = tag;
    return out;
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
    case Method::SampleMvdr: return "sample-mvdr";
    case Method::DiagonalLoading: return "diagonal-loading";
    case Method::Copra: return "copra";
    case Method::QuasiRls: return "quasi-rls";
    case Method::Optimal: return "optimal";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    for (Method m : kAllMethods)
        if (method_name(m) == name)
            return m;
    return std::nullopt;
}

BeamformerWeights mvdr_weights(const HermitianEigensystem& es, const ComplexVector& a) {
    check_steering(es, a, "mvdr_weights");
    return capon(es, a, 0.0, Method::SampleMvdr);
}

BeamformerWeights mvdr_weights(const ComplexMatrix& c, const ComplexVector& a) {
    return mvdr_weights(hermitian_evd(c), a);
}

BeamformerWeights diagonal_loading_weights(const HermitianEigensystem& es, const ComplexVector& a,
                                           double loading) {
    if (!(loading >= 0.0) || !std::isfinite(loading))
        throw std::invalid_argument("diagonal_loading_weights: loading must be finite and non-negative");
    check_steering(es, a, "diagonal_loading_weights");
    return capon(es, a, loading, Method::DiagonalLoading);
}

BeamformerWeights diagonal_loading_weights(const ComplexMatrix& c, const ComplexVector& a,
                                           double loading) {
    return diagonal_loading_weights(hermitian_evd(c), a, loading);
}

BeamformerWeights copra_weights(const HermitianEigensystem& es, double gamma_b, double gamma_z,
                                const ComplexVector& a, Method tag) {
    if (!(gamma_b >= 0.0) || !(gamma_z >= 0.0) || !std::isfinite(gamma_b) || !std::isfinite(gamma_z))
        throw std::invalid_argument("copra_weights: regularization parameters must be finite and non-negative");
    check_steering(es, a, "copra_weights");
    if ((gamma_b == 0.0 || gamma_z == 0.0) &&
        !(es.min_eigenvalue() > kSingularRatio * es.max_eigenvalue()))
        throw NumericalError("copra_weights: zero regularization on a singular spectrum");

    const RealVector energy = es.mode_energy(a);
    double denom = 0;
    for (Eigen::Index i = 0; i < energy.size(); ++i) {
        const double l = es.lambda()(i);
        denom += energy(i) * l / ((l + gamma_b) * (l + gamma_b));
    }
    if (!(denom > 0.0))
        throw NumericalError("copra_weights: steering vector has no energy in the retained modes");

    BeamformerWeights out;
    out.w = apply_filtered(
        es, [=](double l) { return l / ((l + gamma_b) * (l + gamma_z)) / denom; }, a);
    out.method = tag;
    out.gamma_b = gamma_b;
    out.gamma_z = gamma_z;
    return out;
}

BeamformerWeights optimal_weights(const Scenario& scenario) {
    BeamformerWeights out = mvdr_weights(true_covariance(scenario), scenario.a_true);
    out.method = Method::Optimal;
    return out;
}

ComplexVector ls_estimate(const HermitianEigensystem& es, const ComplexVector& r) {
    const double smax = std::sqrt(es.max_eigenvalue());
    const double smin = std::sqrt(es.min_eigenvalue());
    if (!(smin > kSingularRatio * smax))
        throw NumericalError("ls_estimate: system matrix is singular");
    return apply_filtered(es, [](double l) { return 1.0 / std::sqrt(l); }, r);
}

ComplexVector rls_estimate(const HermitianEigensystem& es, const ComplexVector& r, double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("rls_estimate: gamma must be finite and non-negative");
    if (gamma == 0.0)
        return ls_estimate(es, r);
    return apply_filtered(es, [gamma](double l) { return std::sqrt(l) / (l + gamma); }, r);
}

double quasi_optimal_gamma(const HermitianEigensystem& es, const RealVector& energy,
                           const QuasiGrid& grid) {
    if (energy.size() != es.size())
        throw std::invalid_argument("quasi_optimal_gamma: energy vector length mismatch");
    if (grid.points < 2 || !(grid.lo_factor > 0.0) || !(grid.hi_factor > grid.lo_factor))
        throw std::invalid_argument("quasi_optimal_gamma: invalid grid");
    const double lmax = es.max_eigenvalue();
    if (!(lmax > 0.0))
        return 0.0;

    const double lo = grid.lo_factor * lmax;
    const double log_ratio = std::log(grid.hi_factor / grid.lo_factor);
    auto gamma_at = [&](int k) { return lo * std::exp(log_ratio * k / (grid.points - 1)); };

    double best_gamma = gamma_at(0);
    double best = std::numeric_limits<double>::infinity();
    double g0 = gamma_at(0);
    for (int k = 0; k + 1 < grid.points; ++k) {
        const double g1 = gamma_at(k + 1);
        double diff2 = 0;
        for (Eigen::Index i = 0; i < energy.size(); ++i) {
            const double l = es.lambda()(i);
            // x_i(g) = sqrt(l) d_i / (l + g)
            const double delta = (g1 - g0) / ((l + g0) * (l + g1));
            diff2 += l * energy(i) * delta * delta;
        }
        if (diff2 < best) {
            best = diff2;
            best_gamma = g0;
        }
        g0 = g1;
    }
    return best_gamma;
}

double quasi_optimal_gamma(const HermitianEigensystem& es, const ComplexVector& r,
                           const QuasiGrid& grid) {
    return quasi_optimal_gamma(es, es.mode_energy(r), grid);
}

double worst_case_cost(const ComplexVector& x, const ComplexVector& r,
                       const HermitianEigensystem& es, double lambda) {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("worst_case_cost: lambda must be non-negative");
    const ComplexVector ax = apply_filtered(es, [](double l) { return std::sqrt(l); }, x);
    return (r - ax).norm() + lambda * x.norm();
}

ComplexVector worst_case_gradient(const ComplexVector& x, const ComplexVector& r,
                                  const HermitianEigensystem& es, double lambda) {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("worst_case_gradient: lambda must be non-negative");
    const ComplexVector ax = apply_filtered(es, [](double l) { return std::sqrt(l); }, x);
    const double res = (r - ax).norm();
    const double xn = x.norm();
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    if (!(res > tiny * std::max(1.0, r.norm())))
        throw NumericalError("worst_case_gradient: residual norm ||r - C^{1/2} x|| vanished");
    if (!(xn > tiny))
        throw NumericalError("worst_case_gradient: estimate norm ||x|| vanished");
    const ComplexVector cx = apply_filtered(es, [](double l) { return l; }, x);
    const ComplexVector ar = apply_filtered(es, [](double l) { return std::sqrt(l); }, r);
    return (cx + (lambda * res / xn) * x - ar) / res;
}

}  // namespace copra
