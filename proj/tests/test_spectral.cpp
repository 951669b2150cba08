#include "doctest.h"

#include <cmath>
#include <complex>

#include "conclab/rng.hpp"
#include "conclab/sampling.hpp"
#include "conclab/spectral.hpp"

using namespace conclab;
using cplx = std::complex<double>;

namespace {

Eigen::MatrixXd random_symmetric(int n, CounterRng& rng, double scale) {
    return sample_entry_matrix(EntryDistribution::gaussian(), n, rng) * scale;
}

} // namespace

TEST_CASE("spectral point requires nonreal z") {
    CHECK_THROWS_AS(SpectralPoint(1.0, 0.0), std::domain_error);
}

TEST_CASE("eigen_symmetric basics") {
    CHECK(eigen_symmetric(Eigen::MatrixXd::Zero(4, 4)).eigenvalues.cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd d = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
    const EigenDecomposition ed = eigen_symmetric(d);
    CHECK(ed.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(ed.eigenvalues(1) == doctest::Approx(2.0));
    CHECK(ed.eigenvalues(2) == doctest::Approx(3.0));

    CounterRng rng(RngState{31, 0});
    const Eigen::MatrixXd m = random_symmetric(20, rng, 1.0 / std::sqrt(20.0));
    const EigenDecomposition e2 = eigen_symmetric(m);
    CHECK(std::abs(m.trace() - e2.eigenvalues.sum()) < 1e-9);
    const Eigen::MatrixXd rec =
        e2.eigenvectors * e2.eigenvalues.asDiagonal() * e2.eigenvectors.transpose();
    CHECK((m - rec).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()));

    Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(3, 3);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(eigen_symmetric(asym), std::domain_error);
}

TEST_CASE("resolvent of the zero matrix") {
    const SpectralPoint z(0.5, 0.8);
    const Resolvent r = resolvent(Eigen::MatrixXd::Zero(5, 5), z);
    const Eigen::MatrixXcd expected = (-1.0 / z.z) * Eigen::MatrixXcd::Identity(5, 5);
    CHECK((r.entries - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("resolvent satisfies the defining equation and entry bound") {
    CounterRng rng(RngState{32, 0});
    const Eigen::MatrixXd m = random_symmetric(30, rng, 1.0 / std::sqrt(30.0));
    const SpectralPoint z(0.5, 0.3);
    const Resolvent r = resolvent(m, z);
    const Eigen::MatrixXcd lhs =
        (m.cast<cplx>() - z.z * Eigen::MatrixXcd::Identity(30, 30)) * r.entries;
    CHECK((lhs - Eigen::MatrixXcd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.entries.cwiseAbs().maxCoeff() <= 1.0 / 0.3 + 1e-9);
}

TEST_CASE("resolvent row-sum identities") {
    CounterRng rng(RngState{33, 0});
    for (double v : {0.1, 0.5, 1.0}) {
        for (int k = 0; k < 20; ++k) {
            const int n = 12;
            const Eigen::MatrixXd m = random_symmetric(n, rng, 1.0 / std::sqrt(n));
            const SpectralPoint z(0.2 * k - 1.0, v);
            const Resolvent r = resolvent(m, z);
            const Resolvent rbar = resolvent(m, SpectralPoint(std::conj(z.z)));
            const Eigen::MatrixXcd r2 = r.entries * r.entries;
            const Eigen::MatrixXcd rrbar = r.entries * rbar.entries;
            for (int i = 0; i < n; ++i) {
                cplx sum_sq(0.0, 0.0);
                double sum_abs = 0.0;
                for (int j = 0; j < n; ++j) {
                    sum_sq += r.entries(j, i) * r.entries(j, i);
                    sum_abs += std::norm(r.entries(j, i));
                }
                CHECK(std::abs(sum_sq - r2(i, i)) < 1e-9);
                CHECK(std::abs(sum_abs - rrbar(i, i)) < 1e-9);
            }
        }
    }
}

TEST_CASE("empirical stieltjes transform") {
    const SpectralPoint zi(0.0, 1.0);
    CHECK(std::abs(stieltjes_empirical(Eigen::MatrixXd::Zero(4, 4), zi) - cplx(0.0, 1.0)) < 1e-14);

    const SpectralPoint z2(0.0, 2.0);
    const cplx expected = 1.0 / (cplx(1.0, 0.0) - cplx(0.0, 2.0));
    CHECK(std::abs(stieltjes_empirical(Eigen::MatrixXd::Identity(6, 6), z2) - expected) < 1e-14);

    CounterRng rng(RngState{34, 0});
    const Eigen::MatrixXd m = random_symmetric(25, rng, 1.0 / 5.0);
    CHECK(stieltjes_empirical(m, SpectralPoint(0.7, 0.4)).imag() > 0.0);
}

TEST_CASE("stieltjes via eigenvalues equals trace of the direct inverse") {
    CounterRng rng(RngState{35, 0});
    for (int k = 0; k < 5; ++k) {
        const int n = 20;
        const Eigen::MatrixXd m = random_symmetric(n, rng, 1.0 / std::sqrt(n));
        const SpectralPoint z(0.3 * k - 0.6, 0.45);
        const Eigen::MatrixXcd direct =
            (m.cast<cplx>() - z.z * Eigen::MatrixXcd::Identity(n, n)).inverse();
        CHECK(std::abs(stieltjes_empirical(m, z) - direct.trace() / static_cast<double>(n)) < 1e-8);
    }
}

TEST_CASE("semicircle stieltjes transform") {
    SUBCASE("derived values at z = i and z = 2i") {
        const cplx si = semicircle_stieltjes(SpectralPoint(0.0, 1.0));
        CHECK(std::abs(si - cplx(0.0, (std::sqrt(5.0) - 1.0) / 2.0)) < 1e-12);
        const cplx s2i = semicircle_stieltjes(SpectralPoint(0.0, 2.0));
        CHECK(std::abs(s2i - cplx(0.0, std::sqrt(2.0) - 1.0)) < 1e-12);
    }
    SUBCASE("root residual and branch over the grid") {
        for (double re = -3.0; re <= 3.001; re += 0.6)
            for (double im = 0.05; im <= 2.001; im += 0.15) {
                const SpectralPoint z(re, im);
                const cplx s = semicircle_stieltjes(z);
                CHECK(std::abs(s * s + z.z * s + 1.0) <= 1e-12);
                CHECK(s.imag() >= 0.0);
                const cplx sm = semicircle_stieltjes(SpectralPoint(re, -im));
                CHECK(sm.imag() <= 0.0);
            }
    }
}

TEST_CASE("resolvent derivative check: closed form at M = 0") {
    // dR/dM_11 at M=0 is -(1/z^2) E_11 = E_11 at z = i
    const double err = resolvent_derivative_check(Eigen::MatrixXd::Zero(6, 6), 0, 0,
                                                  SpectralPoint(0.0, 1.0), 1e-5);
    CHECK(err < 1e-6);
}

TEST_CASE("resolvent derivative check: random matrices") {
    CounterRng rng(RngState{36, 0});
    for (int k = 0; k < 5; ++k) {
        const Eigen::MatrixXd m = random_symmetric(10, rng, 1.0 / std::sqrt(10.0));
        CHECK(resolvent_derivative_check(m, 1, 4, SpectralPoint(0.4, 0.6), 1e-5) < 1e-5);
        CHECK(resolvent_derivative_check(m, 2, 2, SpectralPoint(-0.3, 0.8), 1e-5) < 1e-5);
    }
    CHECK_THROWS_AS(
        resolvent_derivative_check(Eigen::MatrixXd::Zero(3, 3), 0, 0, SpectralPoint(0, 1), 1e-2),
        std::domain_error);
}

TEST_CASE("matrix calculus identities") {
    SUBCASE("first-order expansion at the identity") {
        Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(4, 4);
        e12(0, 1) = e12(1, 0) = 1.0;
        const MatrixPath path{
            [e12](double t) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4) + t * e12); },
            [e12](double) { return e12; }};
        CHECK(matrix_calculus_check(path, 0.0, 1e-5) < 1e-8);
    }
    SUBCASE("scalar exponential path") {
        const MatrixPath path{
            [](double t) { return Eigen::MatrixXd(std::exp(t) * Eigen::MatrixXd::Identity(3, 3)); },
            [](double t) { return Eigen::MatrixXd(std::exp(t) * Eigen::MatrixXd::Identity(3, 3)); }};
        CHECK(matrix_calculus_check(path, 0.3, 1e-5) < 1e-8);
    }
    SUBCASE("random affine path") {
        CounterRng rng(RngState{37, 0});
        const Eigen::MatrixXd a = random_symmetric(8, rng, 0.2);
        const Eigen::MatrixXd base = Eigen::MatrixXd::Identity(8, 8) + random_symmetric(8, rng, 0.1);
        const MatrixPath path{[base, a](double t) { return Eigen::MatrixXd(base + t * a); },
                              [a](double) { return a; }};
        CHECK(matrix_calculus_check(path, 0.1, 1e-5) < 1e-5);
    }
    SUBCASE("near-singular path is a domain error") {
        // diag(1, t) has condition 1/t, far past 1e12 at t = 1e-14
        const MatrixPath path{[](double t) {
                                  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
                                  m(1, 1) = t;
                                  return m;
                              },
                              [](double) {
                                  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
                                  d(1, 1) = 1.0;
                                  return d;
                              }};
        CHECK_THROWS_AS(matrix_calculus_check(path, 1e-14, 1e-5), std::domain_error);
    }
}
