#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "copra/array.hpp"
#include "copra/linalg.hpp"

namespace copra {

enum class Method { SampleMvdr, DiagonalLoading, Copra, QuasiRls, Optimal };

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::SampleMvdr, Method::DiagonalLoading, Method::Copra, Method::QuasiRls, Method::Optimal};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

// Column weight vector w; the beamformer output is w^H y.
struct BeamformerWeights {
    ComplexVector w;
    Method method = Method::SampleMvdr;
    std::optional<double> gamma_b;
    std::optional<double> gamma_z;

    Complex output(const ComplexVector& y) const { return w.dot(y); }
};

/// Capon weights C^-1 a / (a^H C^-1 a), inverted through the eigensystem.
/// Throws NumericalError when the smallest eigenvalue is at or below
/// 1e-12 times the largest.
BeamformerWeights mvdr_weights(const HermitianEigensystem& es, const ComplexVector& a);
BeamformerWeights mvdr_weights(const ComplexMatrix& c, const ComplexVector& a);

// MVDR on C + loading I.
BeamformerWeights diagonal_loading_weights(const HermitianEigensystem& es, const ComplexVector& a,
                                           double loading);
BeamformerWeights diagonal_loading_weights(const ComplexMatrix& c, const ComplexVector& a,
                                           double loading);

/// RLS beamformer weights for regularization parameters (gamma_b, gamma_z):
///
///   w = U (S^2 + gb)^-1 (S^2 + gz)^-1 S^2 U^H a / (a^H U (S^2 + gb)^-2 S^2 U^H a)
///
/// so that w^H y = b^H z / (b^H b) with b, z the RLS solutions of
/// a = C^{1/2} b and y = C^{1/2} z.
BeamformerWeights copra_weights(const HermitianEigensystem& es, double gamma_b, double gamma_z,
                                const ComplexVector& a, Method tag = Method::Copra);

// Clairvoyant MVDR on the true covariance and true steering vector.
BeamformerWeights optimal_weights(const Scenario& scenario);

// Least-squares solution of r = C^{1/2} x.
ComplexVector ls_estimate(const HermitianEigensystem& es, const ComplexVector& r);

// (C + gamma I)^-1 C^{1/2} r
ComplexVector rls_estimate(const HermitianEigensystem& es, const ComplexVector& r, double gamma);

struct QuasiGrid {
    int points = 200;
    double lo_factor = 1e-8;  // relative to max(lambda)
    double hi_factor = 10.0;

    bool operator==(const QuasiGrid&) const = default;
};

/// Quasi-optimality selector: on a geometric grid gamma_k, returns the
/// gamma_k minimizing ||x(gamma_{k+1}) - x(gamma_k)||, ties to smaller gamma.
double quasi_optimal_gamma(const HermitianEigensystem& es, const RealVector& energy,
                           const QuasiGrid& grid = {});
double quasi_optimal_gamma(const HermitianEigensystem& es, const ComplexVector& r,
                           const QuasiGrid& grid = {});

// ||r - C^{1/2} x|| + lambda ||x||
double worst_case_cost(const ComplexVector& x, const ComplexVector& r,
                       const HermitianEigensystem& es, double lambda);

// Gradient of worst_case_cost as d/dRe(x) + i d/dIm(x).
ComplexVector worst_case_gradient(const ComplexVector& x, const ComplexVector& r,
                                  const HermitianEigensystem& es, double lambda);

}  // namespace copra
