#pragma once

#include <optional>
#include <utility>

#include "copra/array.hpp"
#include "copra/linalg.hpp"

namespace copra {

/// Partition of the covariance spectrum into significant and trivial modes.
///
/// A mode is significant when its singular value sqrt(lambda_i) strictly
/// exceeds rho times the mean singular value. Modes are taken from the
/// descending spectrum, so the first n1 are the significant ones.
struct EigenSplit {
    RealVector lambda;   // full spectrum, descending
    int n1 = 0;          // significant modes
    int n2 = 0;          // trivial modes
    double rho = 0.1;
    double threshold = 0.0;  // rho * mean(sqrt(lambda))
    double beta = 1.0;       // n_e / n1

    int n_elements() const { return n1 + n2; }
    auto significant() const { return lambda.head(n1); }
};

EigenSplit split_eigenvalues(const HermitianEigensystem& es, double rho);

// The four trace terms of the secular function and their products.
struct SecularTerms {
    double t_a = 0;  // tr(S^2 (S^2 + g)^-2 dd^H)
    double t_b = 0;  // tr((S1^2 + g)^-2 (beta S1^2 + g))
    double t_d = 0;  // tr((S^2 + g)^-2 dd^H)
    double t_e = 0;  // tr(S1^2 (S1^2 + g)^-2 (beta S1^2 + g))
    double value = 0;       // G(gamma)
    double derivative = 0;  // dG/dgamma
    // Sum of magnitudes of the three products; the round-off floor of
    // `value` is a few ulps of this.
    double scale = 0;
};

/// Evaluates the secular function and its analytic derivative in O(n_e).
///
/// `energy` holds the per-mode weights |d_i|^2 with d = U^H r; for an
/// averaged right-hand side it holds the diagonal of U^H E[rr^H] U.
SecularTerms secular_terms(double gamma, const EigenSplit& split, const RealVector& energy);

double secular_function(double gamma, const EigenSplit& split, const RealVector& energy);
double secular_function(double gamma, const EigenSplit& split, const ComplexVector& d);

struct SecularOptions {
    // Newton start, relative to mean(lambda).
    double init_factor = 1e-6;
    // Sign-scan interval [scan_lo, scan_hi] * mean(lambda).
    double scan_lo_factor = 1e-9;
    double scan_hi_factor = 1e3;
    int scan_points = 200;
    // Residual tolerance relative to |G(gamma_init)|.
    double tol_abs = 1e-12;
    // Relative step tolerance on gamma.
    double tol_rel = 1e-9;
    int max_newton_iterations = 100;
    int max_bisections = 200;
};

struct SecularSolveReport {
    double gamma = 0.0;
    int iterations = 0;
    double residual = 0.0;   // |G(gamma)| at return
    double tolerance = 0.0;  // residual bound used for `converged`
    bool converged = false;
    bool fallback_used = false;
    std::optional<std::pair<double, double>> bracket;
};

/// Solves G(gamma) = 0 for the smallest root on the scan interval.
///
/// A logarithmic sign scan brackets the first sign change; Newton steps
/// from the small initial value are kept inside the bracket, with bisection
/// whenever a step would leave it or fails to shrink it fast enough. When G
/// has no sign change on the interval the report carries the fallback
/// gamma = rho * mean(lambda). Never throws for numerical reasons.
SecularSolveReport solve_secular(const EigenSplit& split, const RealVector& energy,
                                 const SecularOptions& opts = {});
SecularSolveReport solve_secular(const EigenSplit& split, const ComplexVector& d,
                                 const SecularOptions& opts = {});

double fallback_gamma(const EigenSplit& split);

enum class GammaZPolicy { Averaged, PerSnapshotMedian };

struct CopraOptions {
    double rho = 0.1;
    GammaZPolicy gamma_z_policy = GammaZPolicy::Averaged;
    SecularOptions solver;
};

struct CopraDiagnostics {
    SecularSolveReport b;  // steering-vector system
    SecularSolveReport z;  // snapshot system
    double lambda_o_sq = 0.0;  // perturbation bound at gamma_b
    double gamma_b() const { return b.gamma; }
    double gamma_z() const { return z.gamma; }
};

/// Regularization parameters for both linear systems of the beamformer.
CopraDiagnostics copra_gammas(const HermitianEigensystem& es, const EigenSplit& split,
                              const ComplexVector& a_presumed, const SnapshotSet& snapshots,
                              const CopraOptions& opts = {});

/// Mean of |U^H y[t]|^2 over all snapshots.
RealVector averaged_snapshot_energy(const HermitianEigensystem& es, const SnapshotSet& snapshots);

/// Optimal perturbation bound lambda_o^2 for a given gamma and right-hand side.
double lambda_o_sq(double gamma, const HermitianEigensystem& es, const ComplexVector& r);

/// Mean-squared error of the RLS estimate for signal covariance `c_xx`.
double rls_mse(double gamma, const HermitianEigensystem& es, const ComplexMatrix& c_xx,
               double noise_power);

/// Closed-form approximate MSE minimizer n_e sigma_v^2 / tr(C_xx).
double gamma_mse_approx(double c_xx_trace, double noise_power, int n_elements);

}  // namespace copra
