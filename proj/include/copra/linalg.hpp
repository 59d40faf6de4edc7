#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace copra {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Raised when a numerical routine cannot produce a trustworthy result
// (singular system, vanishing denominator, solver failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigen-decomposition C = U diag(lambda) U^H of a Hermitian PSD matrix.
///
/// Eigenvalues are sorted in descending order and clamped at zero; the
/// columns of U are the matching orthonormal eigenvectors.
class HermitianEigensystem {
public:
    /// Builds an eigensystem from explicit parts. `lambda` must be
    /// non-negative and sorted descending, `u` square with matching size.
    HermitianEigensystem(ComplexMatrix u, RealVector lambda);

    const ComplexMatrix& u() const noexcept { return u_; }
    const RealVector& lambda() const noexcept { return lambda_; }
    Eigen::Index size() const noexcept { return lambda_.size(); }

    double mean_eigenvalue() const { return lambda_.mean(); }
    double max_eigenvalue() const { return lambda_(0); }
    double min_eigenvalue() const { return lambda_(lambda_.size() - 1); }

    // U diag(lambda) U^H
    ComplexMatrix reconstruct() const;

    // Coordinates of v in the eigenbasis, U^H v.
    ComplexVector project(const ComplexVector& v) const;

    // |U^H v|^2 per mode.
    RealVector mode_energy(const ComplexVector& v) const;

private:
    ComplexMatrix u_;
    RealVector lambda_;
};

/// Decomposes a Hermitian matrix.
///
/// Throws std::invalid_argument for non-square input or when
/// ||a - a^H||_F exceeds 1e-8 ||a||_F, and NumericalError if the
/// iteration fails to converge.
HermitianEigensystem hermitian_evd(const ComplexMatrix& a);

/// Element-wise square roots of the eigenvalues (the diagonal of Sigma).
RealVector matrix_sqrt_eigs(const HermitianEigensystem& es);

using SpectralMap = std::function<double(double)>;

/// U diag(f(lambda_i)) U^H v.
ComplexVector apply_filtered(const HermitianEigensystem& es, const SpectralMap& f,
                             const ComplexVector& v);

bool all_finite(const ComplexVector& v);
bool all_finite(const ComplexMatrix& m);

}  // namespace copra
