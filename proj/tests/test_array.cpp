#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "copra/array.hpp"
#include "copra/random.hpp"
#include "test_util.hpp"

using namespace copra;

namespace {

// Kolmogorov-Smirnov distance of samples to the uniform CDF on [lo, hi].
double ks_uniform(std::vector<double> xs, double lo, double hi) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = (xs[i] - lo) / (hi - lo);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

ScenarioConfig quiet_config() {
    ScenarioConfig c;
    c.n_interferers = 0;
    return c;
}

}  // namespace

TEST_CASE("random stream is deterministic and substreams differ") {
    RandomStream a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        (void)c.uniform();
    }
    CHECK(substream_seed(1, 0) != substream_seed(1, 1));
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
    CHECK(substream_seed(9, 5) == substream_seed(9, 5));
    // first splitmix64 output from state 0
    CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("random variates follow their distributions") {
    RandomStream rng(7);
    const int n = 100000;
    std::vector<double> u(n), z(n);
    double re2 = 0, im2 = 0, reim = 0;
    for (int i = 0; i < n; ++i) {
        u[i] = rng.uniform();
        z[i] = rng.normal();
        const auto c = rng.complex_normal();
        re2 += c.real() * c.real();
        im2 += c.imag() * c.imag();
        reim += c.real() * c.imag();
    }
    CHECK(ks_uniform(u, 0, 1) < 0.01);
    std::sort(z.begin(), z.end());
    double d = 0;
    for (int i = 0; i < n; ++i) {
        const double f = normal_cdf(z[i]);
        d = std::max({d, (i + 1.0) / n - f, f - double(i) / n});
    }
    CHECK(d < 0.01);
    CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(im2 / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(reim / n) < 0.01);
}

TEST_CASE("steering vector") {
    const ArrayGeometry g4{4, 0.5};
    const ComplexVector a0 = steering_vector(g4, 0.0);
    for (int p = 0; p < 4; ++p)
        CHECK(std::abs(a0(p) - 1.0) < 1e-15);

    const ComplexVector a30 = steering_vector(g4, 30.0);
    const Complex want[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
    for (int p = 0; p < 4; ++p)
        CHECK(std::abs(a30(p) - want[p]) < 1e-14);
    CHECK(a30(0) == Complex(1, 0));

    const ArrayGeometry g10;
    for (double doa = -90; doa <= 90; doa += 7.5) {
        const ComplexVector a = steering_vector(g10, doa);
        CHECK(a.squaredNorm() == doctest::Approx(10).epsilon(1e-14));
        for (int p = 0; p < 10; ++p)
            CHECK(std::abs(std::abs(a(p)) - 1.0) < 1e-14);
    }
    CHECK_THROWS_AS(steering_vector(g10, 90.5), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector(g10, -91), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector(ArrayGeometry{1, 0.5}, 0), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector(ArrayGeometry{4, 0.0}, 0), std::invalid_argument);
}

TEST_CASE("draw_scenario") {
    SUBCASE("zero error bound keeps the presumed vector exact") {
        ScenarioConfig c;
        c.error_bound_deg = 0;
        RandomStream rng(1);
        const Scenario s = draw_scenario(rng, c);
        CHECK(s.soi_error_deg == 0.0);
        CHECK((s.a_presumed - s.a_true).norm() == 0.0);
    }
    SUBCASE("powers and invariants") {
        ScenarioConfig c;
        c.snr_db = 10;
        c.inr_db = 30;
        RandomStream rng(2);
        for (int k = 0; k < 200; ++k) {
            const Scenario s = draw_scenario(rng, c);
            CHECK(s.noise_power == 1.0);
            CHECK(s.soi_power == doctest::Approx(10.0));
            REQUIRE(s.interferer_powers.size() == 2);
            CHECK(s.interferer_powers[0] == doctest::Approx(1000.0));
            CHECK(std::abs(s.soi_error_deg) <= 5.0);
            CHECK((s.a_true - steering_vector(s.geometry, s.soi_doa_deg)).norm() == 0.0);
            for (double d : s.interferer_doas_deg) {
                CHECK(std::abs(d - s.soi_doa_deg) >= c.interferer_guard_deg);
                CHECK(std::abs(d) <= 90.0);
            }
        }
    }
    SUBCASE("same seed, same scenario") {
        RandomStream r1(99), r2(99);
        const Scenario a = draw_scenario(r1, ScenarioConfig{});
        const Scenario b = draw_scenario(r2, ScenarioConfig{});
        CHECK(a.soi_doa_deg == b.soi_doa_deg);
        CHECK(a.soi_error_deg == b.soi_error_deg);
        CHECK(a.interferer_doas_deg == b.interferer_doas_deg);
        CHECK(a.a_presumed == b.a_presumed);
    }
    SUBCASE("DOAs are uniform on [-90, 90]") {
        RandomStream rng(5);
        std::vector<double> soi, err;
        for (int k = 0; k < 100000; ++k) {
            const Scenario s = draw_scenario(rng, quiet_config());
            soi.push_back(s.soi_doa_deg);
            err.push_back(s.soi_error_deg);
        }
        CHECK(ks_uniform(soi, -90, 90) < 0.01);
        CHECK(ks_uniform(err, -5, 5) < 0.01);
    }
    SUBCASE("invalid config") {
        ScenarioConfig c;
        c.n_interferers = -1;
        RandomStream rng(1);
        CHECK_THROWS_AS(draw_scenario(rng, c), std::invalid_argument);
        c = ScenarioConfig{};
        c.snr_db = INFINITY;
        CHECK_THROWS_AS(draw_scenario(rng, c), std::invalid_argument);
        c = ScenarioConfig{};
        c.error_bound_deg = -1;
        CHECK_THROWS_AS(draw_scenario(rng, c), std::invalid_argument);
    }
}

TEST_CASE("presumed vector can look past endfire") {
    // a presumed angle beyond 90 degrees still evaluates the array manifold
    const Scenario s = make_scenario(ArrayGeometry{}, 88.0, 4.0, {}, 1.0, {});
    const double phase_step = 2 * std::numbers::pi * 0.5 * std::sin(92.0 * std::numbers::pi / 180);
    CHECK(std::abs(s.a_presumed(1) - std::polar(1.0, phase_step)) < 1e-14);
}

TEST_CASE("synthesize_snapshots") {
    SUBCASE("pure noise has unit per-element variance") {
        const Scenario s = make_scenario(ArrayGeometry{}, 10.0, 0.0, {20.0}, 0.0, {0.0});
        RandomStream rng(4);
        const SnapshotSet y = synthesize_snapshots(s, 10000, rng);
        for (int p = 0; p < 10; ++p) {
            const double var = y.snapshots.row(p).squaredNorm() / 10000.0;
            CHECK(var == doctest::Approx(1.0).epsilon(0.05));
        }
    }
    SUBCASE("single source with vanishing noise is rank one") {
        const Scenario s = make_scenario(ArrayGeometry{}, 25.0, 0.0, {}, 1.0, {}, 1e-30);
        RandomStream rng(6);
        const SnapshotSet y = synthesize_snapshots(s, 50, rng);
        for (int t = 0; t < 50; ++t) {
            const ComplexVector col = y.snapshots.col(t);
            const Complex coef = s.a_true.dot(col) / s.a_true.squaredNorm();
            CHECK((col - coef * s.a_true).norm() < 1e-10 * col.norm());
        }
        const Eigen::JacobiSVD<ComplexMatrix> svd(y.snapshots);
        CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
    }
    SUBCASE("fixed seed is bit-identical") {
        RandomStream r1(3), r2(3);
        const Scenario s = draw_scenario(r1, ScenarioConfig{});
        (void)draw_scenario(r2, ScenarioConfig{});
        CHECK(synthesize_snapshots(s, 30, r1).snapshots == synthesize_snapshots(s, 30, r2).snapshots);
    }
    SUBCASE("needs a snapshot") {
        RandomStream rng(1);
        const Scenario s = make_scenario(ArrayGeometry{}, 0, 0, {}, 1, {});
        CHECK_THROWS_AS(synthesize_snapshots(s, 0, rng), std::invalid_argument);
    }
}

TEST_CASE("sample covariance") {
    SnapshotSet one{ComplexMatrix(2, 1)};
    one.snapshots << 1.0, Complex(0, 1);
    const ComplexMatrix c = sample_covariance(one);
    CHECK(c(0, 0) == Complex(1, 0));
    CHECK(c(0, 1) == Complex(0, -1));
    CHECK(c(1, 0) == Complex(0, 1));
    CHECK(c(1, 1) == Complex(1, 0));

    SnapshotSet e1{ComplexMatrix::Zero(3, 5)};
    e1.snapshots.row(0).setOnes();
    const ComplexMatrix c1 = sample_covariance(e1);
    ComplexMatrix want = ComplexMatrix::Zero(3, 3);
    want(0, 0) = 1;
    CHECK(c1 == want);

    RandomStream rng(12);
    for (int k = 0; k < 50; ++k) {
        const SnapshotSet y{testing::random_matrix(rng, 10, 7)};
        const ComplexMatrix s = sample_covariance(y);
        CHECK((s - s.adjoint()).norm() < 1e-14 * s.norm());
        CHECK(s.trace().real() == doctest::Approx(y.snapshots.squaredNorm() / 7).epsilon(1e-12));
        const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(s);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
    CHECK_THROWS_AS(sample_covariance(SnapshotSet{ComplexMatrix(3, 0)}), std::invalid_argument);
}

TEST_CASE("interference-plus-noise covariance") {
    const ArrayGeometry g;
    CHECK((interference_noise_covariance(make_scenario(g, 0, 0, {}, 1, {})) -
           ComplexMatrix::Identity(10, 10))
              .norm() == 0.0);

    const Scenario one = make_scenario(g, 0, 0, {40.0}, 1, {50.0});
    const ComplexVector ai = steering_vector(g, 40.0);
    const ComplexMatrix c = interference_noise_covariance(one);
    CHECK((c - (ComplexMatrix::Identity(10, 10) + 50.0 * ai * ai.adjoint())).norm() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(c);
    CHECK(eig.eigenvalues()(9) == doctest::Approx(1 + 50.0 * 10).epsilon(1e-12));
    for (int i = 0; i < 9; ++i)
        CHECK(eig.eigenvalues()(i) == doctest::Approx(1.0).epsilon(1e-10));

    const Scenario two = make_scenario(g, 0, 0, {-30.0, 60.0}, 1, {100.0, 7.0}, 2.0);
    CHECK(interference_noise_covariance(two).trace().real() ==
          doctest::Approx(10 * (2.0 + 107.0)).epsilon(1e-13));
}

TEST_CASE("true covariance") {
    const ArrayGeometry g;
    const Scenario s0 = make_scenario(g, 12, 0, {-40}, 0.0, {30});
    CHECK((true_covariance(s0) - interference_noise_covariance(s0)).norm() == 0.0);

    const Scenario s1 = make_scenario(g, 12, 0, {}, 4.0, {}, 0.5);
    CHECK((true_covariance(s1) -
           (0.5 * ComplexMatrix::Identity(10, 10) + 4.0 * s1.a_true * s1.a_true.adjoint()))
              .norm() < 1e-12);

    RandomStream rng(31);
    const Scenario s = draw_scenario(rng, ScenarioConfig{});
    const ComplexMatrix c = true_covariance(s);
    const ComplexMatrix chat = sample_covariance(synthesize_snapshots(s, 100000, rng));
    CHECK((chat - c).norm() / c.norm() < 0.02);
}

TEST_CASE("sample covariance error shrinks with more snapshots") {
    const ScenarioConfig cfg;
    double err[3] = {0, 0, 0};
    const int sizes[3] = {100, 1000, 10000};
    for (int trial = 0; trial < 20; ++trial) {
        RandomStream rng(substream_seed(77, trial));
        const Scenario s = draw_scenario(rng, cfg);
        const ComplexMatrix c = true_covariance(s);
        for (int k = 0; k < 3; ++k)
            err[k] += (sample_covariance(synthesize_snapshots(s, sizes[k], rng)) - c).norm() / c.norm();
    }
    CHECK(err[0] > err[1]);
    CHECK(err[1] > err[2]);
}
