#include "copra/secular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace copra {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Values of G below this many ulps of its term scale carry no sign.
constexpr double kNoiseUlps = 64.0;

int significant_sign(const SecularTerms& t) {
    if (std::abs(t.value) <= kNoiseUlps * kEps * t.scale)
        return 0;
    return t.value > 0 ? 1 : -1;
}

void check_energy(const EigenSplit& split, const RealVector& energy) {
    if (energy.size() != split.lambda.size())
        throw std::invalid_argument("secular: energy vector has length " +
                                    std::to_string(energy.size()) + ", expected " +
                                    std::to_string(split.lambda.size()));
}

}  // namespace

EigenSplit split_eigenvalues(const HermitianEigensystem& es, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("split_eigenvalues: rho must lie in (0, 1), got " +
                                    std::to_string(rho));
    EigenSplit split;
    split.lambda = es.lambda();
    split.rho = rho;
    const RealVector sv = es.lambda().cwiseSqrt();
    split.threshold = rho * sv.mean();
    const auto n = static_cast<int>(sv.size());
    int n1 = 0;
    while (n1 < n && sv(n1) > split.threshold)
        ++n1;
    // The largest singular value is at least the mean, so for rho < 1 only
    // an all-zero spectrum can leave n1 = 0; keep one mode so beta is defined.
    split.n1 = std::max(n1, 1);
    split.n2 = n - split.n1;
    split.beta = static_cast<double>(n) / split.n1;
    return split;
}

SecularTerms secular_terms(double gamma, const EigenSplit& split, const RealVector& energy) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("secular_function: gamma must be positive and finite");
    check_energy(split, energy);

    double t_a = 0, t_a1 = 0, t_d = 0, t_d1 = 0;
    for (Eigen::Index i = 0; i < split.lambda.size(); ++i) {
        const double l = split.lambda(i);
        const double inv = 1.0 / (l + gamma);
        const double inv2 = inv * inv;
        const double w = energy(i);
        t_a += l * w * inv2;
        t_d += w * inv2;
        t_a1 -= 2.0 * l * w * inv2 * inv;
        t_d1 -= 2.0 * w * inv2 * inv;
    }
    double t_b = 0, t_b1 = 0, t_e = 0, t_e1 = 0;
    for (int i = 0; i < split.n1; ++i) {
        const double l = split.lambda(i);
        const double inv = 1.0 / (l + gamma);
        const double inv2 = inv * inv;
        const double num = split.beta * l + gamma;
        // d/dg [num / (l+g)^2] = 1/(l+g)^2 - 2 num/(l+g)^3
        const double dq = inv2 - 2.0 * num * inv2 * inv;
        t_b += num * inv2;
        t_b1 += dq;
        t_e += l * num * inv2;
        t_e1 += l * dq;
    }

    const double n2 = split.n2;
    SecularTerms t;
    t.t_a = t_a;
    t.t_b = t_b;
    t.t_d = t_d;
    t.t_e = t_e;
    const double ab = t_a * t_b;
    const double trivial = n2 * t_a / gamma;
    const double de = t_d * t_e;
    t.value = ab + trivial - de;
    t.derivative = t_a1 * t_b + t_a * t_b1 + n2 * (t_a1 / gamma - t_a / (gamma * gamma)) -
                   t_d1 * t_e - t_d * t_e1;
    t.scale = std::abs(ab) + std::abs(trivial) + std::abs(de);
    return t;
}

double secular_function(double gamma, const EigenSplit& split, const RealVector& energy) {
    return secular_terms(gamma, split, energy).value;
}

double secular_function(double gamma, const EigenSplit& split, const ComplexVector& d) {
    return secular_function(gamma, split, RealVector(d.cwiseAbs2()));
}

double fallback_gamma(const EigenSplit& split) {
    return split.rho * split.lambda.mean();
}

SecularSolveReport solve_secular(const EigenSplit& split, const RealVector& energy,
                                 const SecularOptions& opts) {
    check_energy(split, energy);
    SecularSolveReport report;
    const double mean = split.lambda.mean();

    auto fallback = [&]() {
        report.gamma = fallback_gamma(split);
        report.fallback_used = true;
        report.converged = false;
        if (report.gamma > 0.0) {
            const SecularTerms t = secular_terms(report.gamma, split, energy);
            report.residual = std::abs(t.value);
        }
        return report;
    };
    if (!(mean > 0.0) || !energy.allFinite())
        return fallback();

    const double gamma_init = opts.init_factor * mean;
    const SecularTerms init = secular_terms(gamma_init, split, energy);
    const double tol_residual = opts.tol_abs * std::abs(init.value);

    // Logarithmic sign scan for the first sign change.
    const int n_scan = std::max(opts.scan_points, 2);
    const double scan_lo = opts.scan_lo_factor * mean;
    const double log_ratio = std::log(opts.scan_hi_factor / opts.scan_lo_factor);
    double lo = 0, hi = 0;
    int sign_lo = 0;
    bool bracketed = false;
    double last_gamma = 0;
    int last_sign = 0;
    for (int k = 0; k < n_scan && !bracketed; ++k) {
        const double g = scan_lo * std::exp(log_ratio * k / (n_scan - 1));
        const int s = significant_sign(secular_terms(g, split, energy));
        if (s == 0)
            continue;
        if (last_sign != 0 && s != last_sign) {
            lo = last_gamma;
            hi = g;
            sign_lo = last_sign;
            bracketed = true;
        }
        last_gamma = g;
        last_sign = s;
    }
    if (!bracketed)
        return fallback();
    report.bracket = std::make_pair(lo, hi);

    // Safeguarded Newton inside [lo, hi].
    double x = std::clamp(gamma_init, lo, hi);
    double dx_old = hi - lo;
    double dx = dx_old;
    SecularTerms t = secular_terms(x, split, energy);
    int iterations = 0;
    bool step_converged = false;
    for (; iterations < opts.max_newton_iterations; ++iterations) {
        if (t.value == 0.0) {
            step_converged = true;
            break;
        }
        const int s = t.value > 0 ? 1 : -1;
        if (s == sign_lo)
            lo = x;
        else
            hi = x;

        const bool newton_ok = t.derivative != 0.0 && std::isfinite(t.derivative);
        const double x_newton = newton_ok ? x - t.value / t.derivative : 0.0;
        const bool inside = newton_ok && x_newton > lo && x_newton < hi;
        const bool fast = std::abs(2.0 * t.value) <= std::abs(dx_old * t.derivative);
        double x_next;
        if (inside && fast) {
            x_next = x_newton;
        } else {
            x_next = 0.5 * (lo + hi);
        }
        dx_old = dx;
        dx = x_next - x;
        x = x_next;
        t = secular_terms(x, split, energy);
        if (std::abs(dx) <= opts.tol_rel * x && std::abs(t.value) <= std::max(tol_residual, kNoiseUlps * kEps * t.scale)) {
            ++iterations;
            step_converged = true;
            break;
        }
    }
    // Newton budget exhausted: finish by bisection.
    for (int b = 0; !step_converged && b < opts.max_bisections; ++b, ++iterations) {
        if (t.value == 0.0 || hi - lo <= opts.tol_rel * lo)
            break;
        const int s = t.value > 0 ? 1 : -1;
        if (s == sign_lo)
            lo = x;
        else
            hi = x;
        x = 0.5 * (lo + hi);
        t = secular_terms(x, split, energy);
    }

    report.gamma = x;
    report.iterations = iterations;
    report.residual = std::abs(t.value);
    report.tolerance = std::max(tol_residual, kNoiseUlps * kEps * t.scale);
    report.converged = report.residual <= report.tolerance && x > 0.0;
    return report;
}

SecularSolveReport solve_secular(const EigenSplit& split, const ComplexVector& d,
                                 const SecularOptions& opts) {
    return solve_secular(split, RealVector(d.cwiseAbs2()), opts);
}

RealVector averaged_snapshot_energy(const HermitianEigensystem& es, const SnapshotSet& snapshots) {
    if (snapshots.n_snapshots() < 1)
        throw std::invalid_argument("averaged_snapshot_energy: empty snapshot set");
    if (snapshots.n_elements() != es.size())
        throw std::invalid_argument("averaged_snapshot_energy: snapshot dimension mismatch");
    const ComplexMatrix coords = es.u().adjoint() * snapshots.snapshots;
    return coords.cwiseAbs2().rowwise().mean();
}

CopraDiagnostics copra_gammas(const HermitianEigensystem& es, const EigenSplit& split,
                              const ComplexVector& a_presumed, const SnapshotSet& snapshots,
                              const CopraOptions& opts) {
    if (a_presumed.size() != es.size() || snapshots.n_elements() != es.size())
        throw std::invalid_argument("copra_gammas: dimension mismatch between eigensystem and inputs");

    CopraDiagnostics diag;
    diag.b = solve_secular(split, es.mode_energy(a_presumed), opts.solver);

    switch (opts.gamma_z_policy) {
    case GammaZPolicy::Averaged:
        diag.z = solve_secular(split, averaged_snapshot_energy(es, snapshots), opts.solver);
        break;
    case GammaZPolicy::PerSnapshotMedian: {
        std::vector<SecularSolveReport> reports;
        reports.reserve(static_cast<std::size_t>(snapshots.n_snapshots()));
        for (Eigen::Index t = 0; t < snapshots.n_snapshots(); ++t)
            reports.push_back(solve_secular(
                split, es.mode_energy(snapshots.snapshots.col(t)), opts.solver));
        std::stable_sort(reports.begin(), reports.end(),
                         [](const auto& l, const auto& r) { return l.gamma < r.gamma; });
        // Lower median, so the chosen gamma is one that was actually solved.
        diag.z = reports[(reports.size() - 1) / 2];
        break;
    }
    }

    if (diag.b.gamma > 0.0 && a_presumed.squaredNorm() > 0.0)
        diag.lambda_o_sq = lambda_o_sq(diag.b.gamma, es, a_presumed);
    return diag;
}

double lambda_o_sq(double gamma, const HermitianEigensystem& es, const ComplexVector& r) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("lambda_o_sq: gamma must be positive");
    const RealVector w = es.mode_energy(r);
    double num = 0, den = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double l = es.lambda()(i);
        const double inv2 = 1.0 / ((l + gamma) * (l + gamma));
        num += l * w(i) * inv2;
        den += w(i) * inv2;
    }
    if (!(den > 0.0))
        throw std::invalid_argument("lambda_o_sq: right-hand side is zero");
    return num / den;
}

double rls_mse(double gamma, const HermitianEigensystem& es, const ComplexMatrix& c_xx,
               double noise_power) {
    if (!(gamma >= 0.0))
        throw std::invalid_argument("rls_mse: gamma must be non-negative");
    if (c_xx.rows() != es.size() || c_xx.cols() != es.size())
        throw std::invalid_argument("rls_mse: signal covariance dimension mismatch");
    const RealVector c_diag = (es.u().adjoint() * c_xx * es.u()).diagonal().real();
    double mse = 0;
    for (Eigen::Index i = 0; i < c_diag.size(); ++i) {
        const double l = es.lambda()(i);
        if (l == 0.0) {
            // Null mode: the noise term vanishes and the bias term is the
            // full signal energy for every gamma (its gamma -> 0 limit too).
            mse += c_diag(i);
            continue;
        }
        const double inv2 = 1.0 / ((l + gamma) * (l + gamma));
        mse += noise_power * l * inv2 + gamma * gamma * c_diag(i) * inv2;
    }
    return mse;
}

double gamma_mse_approx(double c_xx_trace, double noise_power, int n_elements) {
    if (!(c_xx_trace > 0.0))
        throw std::invalid_argument("gamma_mse_approx: signal covariance trace must be positive");
    return n_elements * noise_power / c_xx_trace;
}

}  // namespace copra
