#include "copra/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace copra {

HermitianEigensystem::HermitianEigensystem(ComplexMatrix u, RealVector lambda)
    : u_(std::move(u)), lambda_(std::move(lambda)) {
    if (lambda_.size() == 0)
        throw std::invalid_argument("eigensystem: empty spectrum");
    if (u_.rows() != lambda_.size() || u_.cols() != lambda_.size())
        throw std::invalid_argument("eigensystem: eigenvector matrix does not match spectrum size");
    for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
        if (!std::isfinite(lambda_(i)) || lambda_(i) < 0.0)
            throw std::invalid_argument("eigensystem: eigenvalues must be finite and non-negative");
        if (i > 0 && lambda_(i) > lambda_(i - 1))
            throw std::invalid_argument("eigensystem: eigenvalues must be sorted descending");
    }
}

ComplexMatrix HermitianEigensystem::reconstruct() const {
    return u_ * lambda_.cast<Complex>().asDiagonal() * u_.adjoint();
}

ComplexVector HermitianEigensystem::project(const ComplexVector& v) const {
    if (v.size() != size())
        throw std::invalid_argument("eigensystem: vector length " + std::to_string(v.size()) +
                                    " does not match dimension " + std::to_string(size()));
    return u_.adjoint() * v;
}

RealVector HermitianEigensystem::mode_energy(const ComplexVector& v) const {
    return project(v).cwiseAbs2();
}

HermitianEigensystem hermitian_evd(const ComplexMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument("hermitian_evd: matrix must be square and non-empty");
    if (!all_finite(a))
        throw std::invalid_argument("hermitian_evd: matrix has non-finite entries");

    const double norm = a.norm();
    const double asym = (a - a.adjoint()).norm();
    if (asym > 1e-8 * norm)
        throw std::invalid_argument("hermitian_evd: matrix is not Hermitian (relative defect " +
                                    std::to_string(norm > 0 ? asym / norm : asym) + ")");

    // The solver reads only one triangle, so hand it the Hermitian part.
    const ComplexMatrix herm = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("hermitian_evd: eigen-iteration did not converge");

    // Eigen returns ascending order; reverse with a stable sort so equal
    // eigenvalues keep a deterministic order.
    const Eigen::Index n = a.rows();
    const RealVector& vals = solver.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return vals(l) > vals(r); });

    ComplexMatrix u(n, n);
    RealVector lambda(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        u.col(k) = solver.eigenvectors().col(src);
        lambda(k) = std::max(0.0, vals(src));
    }
    return HermitianEigensystem(std::move(u), std::move(lambda));
}

RealVector matrix_sqrt_eigs(const HermitianEigensystem& es) {
    return es.lambda().cwiseSqrt();
}

ComplexVector apply_filtered(const HermitianEigensystem& es, const SpectralMap& f,
                             const ComplexVector& v) {
    ComplexVector coords = es.project(v);
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
        const double factor = f(es.lambda()(i));
        if (!std::isfinite(factor))
            throw NumericalError("apply_filtered: spectral map produced a non-finite value at mode " +
                                 std::to_string(i));
        coords(i) *= factor;
    }
    return es.u() * coords;
}

bool all_finite(const ComplexVector& v) {
    return v.allFinite();
}

bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

}  // namespace copra
