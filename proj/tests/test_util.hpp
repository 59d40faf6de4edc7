#pragma once

#include <cstdint>

#include "copra/linalg.hpp"
#include "copra/random.hpp"

namespace testing {

inline copra::ComplexMatrix random_matrix(copra::RandomStream& rng, int rows, int cols) {
    copra::ComplexMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = rng.complex_normal();
    return m;
}

inline copra::ComplexVector random_vector(copra::RandomStream& rng, int n) {
    return random_matrix(rng, n, 1).col(0);
}

inline copra::ComplexMatrix random_hermitian(copra::RandomStream& rng, int n) {
    const copra::ComplexMatrix m = random_matrix(rng, n, n);
    return 0.5 * (m + m.adjoint());
}

// Random PSD matrix with condition number around 10^decades.
inline copra::ComplexMatrix random_psd(copra::RandomStream& rng, int n, double decades = 2) {
    const copra::ComplexMatrix m = random_matrix(rng, n, n);
    Eigen::HouseholderQR<copra::ComplexMatrix> qr(m);
    const copra::ComplexMatrix q = qr.householderQ();
    copra::RealVector s(n);
    for (int i = 0; i < n; ++i)
        s(i) = std::pow(10.0, rng.uniform(-decades, 0.0));
    return q * s.cast<copra::Complex>().asDiagonal() * q.adjoint();
}

inline double rel_err(const copra::ComplexVector& a, const copra::ComplexVector& b) {
    return (a - b).norm() / b.norm();
}

}  // namespace testing
