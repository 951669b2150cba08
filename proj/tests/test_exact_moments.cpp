#include "doctest.h"

#include <cmath>
#include <vector>

#include "conclab/exact_moments.hpp"
#include "conclab/reduce.hpp"
#include "conclab/rng.hpp"
#include "conclab/sampling.hpp"

using namespace conclab;

TEST_CASE("cone moments: gamma ratio collapses") {
    CHECK(exact_moment_cone(2.0, 5, 2.0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(exact_moment_cone(2.0, 4, 4.0) == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
    CHECK(exact_moment_cone(3.0, 7, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // large n must not overflow: n/p = 400 is far past direct Gamma range
    CHECK(std::isfinite(exact_moment_cone(2.0, 800, 4.0)));
    CHECK(exact_moment_cone(2.0, 800, 4.0) == doctest::Approx(3.0 / (800.0 * 802.0)).epsilon(1e-12));
}

TEST_CASE("piecewise bounds dominate the exact moment") {
    for (double p : {2.0, 3.0, 4.0})
        for (int n : {5, 10, 50})
            for (double v : {0.5, 1.0, 2.0, 3.5, 4.0, 7.0, 9.0}) {
                const double exact = exact_moment_cone(p, n, v);
                const double bound = cone_moment_upper_bound(p, n, v);
                CHECK(exact <= bound * (1.0 + 1e-12));
            }
}

TEST_CASE("negative p-gaussian norm moments") {
    CHECK(exact_neg_moment_pgauss(2.0, 10, 2.0) == doctest::Approx(1.0 / 8.0).epsilon(1e-13));
    CHECK(exact_neg_moment_pgauss(2.0, 3, 1.0) ==
          doctest::Approx(2.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-13));
    CHECK(exact_neg_moment_pgauss(4.0, 8, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(exact_neg_moment_pgauss(2.0, 3, 3.0), std::domain_error);

    // the v <= p upper bound
    for (double p : {2.0, 4.0})
        for (int n : {10, 20})
            for (double v : {1.0, 2.0})
                CHECK(exact_neg_moment_pgauss(p, n, v) <= neg_moment_upper_bound(p, n, v));
}

TEST_CASE("negative moments agree with Monte Carlo") {
    const int reps = 30000;
    for (double p : {2.0, 4.0})
        for (int n : {10, 20})
            for (double v : {1.0, 2.0}) {
                CounterRng rng(RngState{41, static_cast<std::uint64_t>(p * 1000 + n * 10 + v)});
                std::vector<double> vals(reps);
                for (int i = 0; i < reps; ++i)
                    vals[i] = std::pow(lp_norm(sample_p_gaussian(p, n, rng), p), -v);
                const double exact = exact_neg_moment_pgauss(p, n, v);
                CHECK(std::abs(mean(vals) - exact) < 3.0 * standard_error(vals));
            }
}

TEST_CASE("density L2 bound values") {
    CHECK(density_l2_bound(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(density_l2_bound(4.0) == doctest::Approx(std::pow(5.0, 0.25)).epsilon(1e-14));
    CHECK(density_l2_bound(3.0) == doctest::Approx(std::pow(4.0, 1.0 / 6.0)).epsilon(1e-14));
}

TEST_CASE("surface density second moment stays under the L2 bound") {
    const int reps = 20000;
    for (double p : {3.0, 4.0})
        for (int n : {10, 50}) {
            CounterRng rng(RngState{42, static_cast<std::uint64_t>(p * 100 + n)});
            std::vector<double> h(reps), h2(reps);
            for (int i = 0; i < reps; ++i) {
                const double v = surface_density_factor(sample_cone(p, n, rng).theta, p);
                h[i] = v;
                h2[i] = v * v;
            }
            const double a = mean(h2), b = mean(h);
            const double ratio = a / (b * b); // = integral of h_{n,p}^2 d mu
            std::vector<double> u(reps);
            for (int i = 0; i < reps; ++i)
                u[i] = h2[i] / (b * b) - 2.0 * a / (b * b * b) * h[i];
            const double se = standard_error(u);
            const double bound = std::pow(p + 1.0, 1.0 - 2.0 / p);
            CHECK(ratio <= bound + 3.0 * se);
        }
}

TEST_CASE("moment to exponential moment constant") {
    CHECK(moment_to_expmoment(1.0) == doctest::Approx(1.0 / (2.0 * M_E)).epsilon(1e-14));
    CHECK(moment_to_expmoment(2.0) == doctest::Approx(1.0 / (4.0 * M_E)).epsilon(1e-14));
    CHECK_THROWS_AS(moment_to_expmoment(0.0), std::domain_error);

    // series bound from the proof: sum (c gamma)^k k^k / k! <= 1 for c = 1/(2 gamma e)
    double series = 0.0;
    double log_kfact = 0.0;
    for (int k = 1; k <= 400; ++k) {
        log_kfact += std::log(static_cast<double>(k));
        series += std::exp(k * std::log(0.5 / M_E) + k * std::log(static_cast<double>(k)) - log_kfact);
    }
    CHECK(series <= 1.0);
}

TEST_CASE("moment to tail bound") {
    SUBCASE("single-order case matches the closed form") {
        const std::vector<double> c = {1.0};
        for (double t : {0.5, 1.0, 3.0, 10.0}) {
            const TailFromMoments out = moment_to_tail(c, 2.0, 2.0, t);
            const double expected = std::min(1.0, 2.0 * std::exp(-std::log(2.0) / (2.0 * M_E * M_E) * t * t));
            CHECK(out.bound == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("t = 0 is capped at 1") {
        const std::vector<double> c = {1.0};
        CHECK(moment_to_tail(c, 2.0, 2.0, 0.0).bound == 1.0);
        CHECK(moment_to_tail(c, 2.0, 2.0, 0.0).trivial_regime);
    }
    SUBCASE("two-order case: min over exponents, L = 2") {
        const std::vector<double> c = {1.0, 1.0};
        for (double t : {0.25, 1.0, 4.0, 9.0}) {
            const TailFromMoments out = moment_to_tail(c, 2.0, 2.0, t);
            // independent reimplementation of the exponent
            const double eta = std::min(t * t, t);
            const double scale = std::pow(2.0 * M_E, 2.0);
            const double expected = std::min(1.0, 2.0 * std::exp(-std::log(2.0) / (2.0 * scale) * eta));
            CHECK(out.bound == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("degenerate coefficients are rejected") {
        const std::vector<double> zeros = {0.0, 0.0};
        CHECK_THROWS_AS(moment_to_tail(zeros, 2.0, 2.0, 1.0), std::domain_error);
    }
}
