#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "conclab/exact_moments.hpp"
#include "conclab/experiments.hpp"
#include "conclab/reduce.hpp"

#include "test_util.hpp"

using namespace conclab;

TEST_CASE("isotonic correction enforces nonincreasing curves") {
    const std::vector<double> wiggly = {1.0, 0.8, 0.85, 0.5, 0.55, 0.1};
    const std::vector<double> fixed = isotonic_nonincreasing(wiggly);
    for (std::size_t i = 1; i < fixed.size(); ++i) CHECK(fixed[i] <= fixed[i - 1] + 1e-15);

    const std::vector<double> monotone = {1.0, 0.7, 0.3, 0.0};
    const std::vector<double> same = isotonic_nonincreasing(monotone);
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(same[i] == monotone[i]);
}

TEST_CASE("local law: sanity on a small run") {
    const std::vector<int> ns = {20, 40};
    const LocalLawResult res = run_local_law(ns, SpectralPoint(0.2, 0.5),
                                             EntryDistribution::gaussian(), 100, RngState{50, 0});
    REQUIRE(res.points.size() == 2);
    for (const LocalLawPoint& pt : res.points) {
        CHECK(pt.mean_s.imag() > 0.0); // Stieltjes positivity
        CHECK(pt.deviation > 0.0);
        CHECK(pt.rate > 0.0);
    }
    CHECK(std::isfinite(res.slope));
    CHECK_FALSE(res.outside_hypothesis);
    CHECK_THROWS_AS(run_local_law(ns, SpectralPoint(0.2, 0.5), EntryDistribution::gaussian(), 50,
                                  RngState{50, 0}),
                    std::domain_error);

    const std::string csv = res.to_csv();
    CHECK(csv.find("n,mean_re,mean_im,stderr,deviation,rate") != std::string::npos);
    const nlohmann::json j = res.to_json();
    CHECK(j["points"].size() == 2);
}

TEST_CASE("local law outside |v| <= 1 warns but still runs") {
    const std::vector<int> ns = {10, 20};
    const LocalLawResult res = run_local_law(ns, SpectralPoint(0.0, 1.5),
                                             EntryDistribution::gaussian(), 100, RngState{49, 0});
    CHECK(res.outside_hypothesis);
    REQUIRE(res.points.size() == 2);
    CHECK(res.points[0].rate == 0.0); // rate undefined outside the hypothesis
    CHECK(res.points[0].mean_s.imag() > 0.0);
}

TEST_CASE("sudakov nested tails: no violation at small scale") {
    const std::vector<double> grid = {0.0, 0.01, 0.02, 0.04, 0.08, 0.15};
    const TailExperimentResult res =
        run_sudakov_tails(20, SpectralPoint(0.0, 1.0), EntryDistribution::gaussian(), 200, 50,
                          grid, RngState{51, 0});
    CHECK(res.empirical_tail[0] == 1.0);
    CHECK_FALSE(res.violation);
    CHECK(res.inner_noise > 0.0);
    for (std::size_t i = 1; i < res.empirical_tail.size(); ++i)
        CHECK(res.empirical_tail[i] <= res.empirical_tail[i - 1] + 1e-15);
}

TEST_CASE("sudakov pointwise variant") {
    const std::vector<double> grid = {0.0, 0.02, 0.05, 0.1, 0.2};
    const TailExperimentResult res =
        run_sudakov_tails(30, SpectralPoint(0.0, 1.0), EntryDistribution::gaussian(), 300, 0, grid,
                          RngState{52, 0}, SudakovExperiment::x_pointwise);
    CHECK_FALSE(res.violation);
    CHECK(res.constants_used.count("exponent_coeff") == 1);

    CHECK_THROWS_AS(run_sudakov_tails(30, SpectralPoint(0.0, 1.0), EntryDistribution::rademacher(),
                                      300, 0, grid, RngState{52, 0},
                                      SudakovExperiment::x_pointwise),
                    std::invalid_argument);
}

TEST_CASE("lipschitz tails") {
    const std::vector<double> grid = {0.0, 0.1, 0.25, 0.5, 0.75, 1.0};

    SUBCASE("constant function is degenerate at zero") {
        const TailExperimentResult res = run_lipschitz_tails(
            2.0, 20, SphereMeasure::cone, lip_constant(), 500, grid, RngState{53, 0});
        CHECK_FALSE(res.violation);
        CHECK(res.empirical_tail[0] == 1.0);
        for (std::size_t i = 1; i < grid.size(); ++i) CHECK(res.empirical_tail[i] == 0.0);
    }
    SUBCASE("coordinate function on the cone measure") {
        const TailExperimentResult res = run_lipschitz_tails(
            2.0, 50, SphereMeasure::cone, lip_coordinate(), 3000, grid, RngState{54, 0});
        CHECK_FALSE(res.violation);
    }
    SUBCASE("surface measure with importance weights") {
        const TailExperimentResult res = run_lipschitz_tails(
            3.0, 30, SphereMeasure::surface, lip_coordinate(), 3000, grid, RngState{55, 0});
        CHECK_FALSE(res.violation);
    }
    SUBCASE("euclidean norm function has certified constant above 1 for p > 2") {
        CHECK(lip_euclidean_norm().lipschitz_p(4.0, 20) ==
              doctest::Approx(std::pow(20.0, 0.75 - 0.5)).epsilon(1e-12));
        const TailExperimentResult res = run_lipschitz_tails(
            4.0, 20, SphereMeasure::cone, lip_euclidean_norm(), 3000, grid, RngState{56, 0});
        CHECK_FALSE(res.violation);
    }
}

TEST_CASE("empirical LS_q checks pass for the shipped functions") {
    const auto fns = lsq_builtin_functions();
    REQUIRE(fns.size() == 3);

    SUBCASE("constant function has zero entropy and energy") {
        const LsqCheckResult r = run_lsq_empirical(2.0, 20, fns[0], 10000, RngState{57, 0});
        CHECK(r.entropy == 0.0);
        CHECK(r.energy == 0.0);
        CHECK(r.pass);
    }
    SUBCASE("coordinate at p = 2") {
        const LsqCheckResult r = run_lsq_empirical(2.0, 20, fns[1], 10000, RngState{58, 0});
        CHECK(r.pass);
        CHECK(r.entropy > 0.0);
        CHECK(r.energy == doctest::Approx(1.0).epsilon(1e-12)); // |grad|_q^q = 1 exactly
    }
    SUBCASE("pair product at p = 4") {
        const LsqCheckResult r = run_lsq_empirical(4.0, 20, fns[2], 10000, RngState{59, 0});
        CHECK(r.pass);
        CHECK(r.sigma_q == doctest::Approx(lsq_constant_cone(4.0, 20)).epsilon(1e-14));
    }
    SUBCASE("replica floor enforced") {
        CHECK_THROWS_AS(run_lsq_empirical(2.0, 20, fns[1], 100, RngState{60, 0}), std::domain_error);
    }
}

TEST_CASE("elementary polynomial construction") {
    CHECK_THROWS_AS(ElementaryPolynomial::checked(3, Eigen::VectorXd::Constant(5, 1.5), 2.0),
                    std::domain_error);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
    CHECK(coefficient_norm(ones, 2.0) == 1.0);
    CHECK(coefficient_norm(ones, 4.0) == doctest::Approx(std::pow(5.0, 0.5)).epsilon(1e-12));
    const ElementaryPolynomial q3 = ElementaryPolynomial::checked(3, ones, 2.0);
    Eigen::VectorXd th = Eigen::VectorXd::Constant(5, 0.2);
    CHECK(q3(th) == doctest::Approx(5.0 * 0.008).epsilon(1e-14));
}

TEST_CASE("polynomial tails: exact means and exp-moment check") {
    const std::vector<double> grid = {0.0, 0.05, 0.1, 0.2, 0.4, 0.8};

    SUBCASE("odd polynomial is centered at zero") {
        const int n = 50;
        const auto poly = ElementaryPolynomial::checked(3, Eigen::VectorXd::Ones(n), 2.0);
        const PolynomialTailResult res =
            run_polynomial_tails(2.0, n, poly, 4000, grid, RngState{61, 0});
        CHECK(res.exact_mean == 0.0);
        CHECK(std::abs(res.empirical_mean) < 3.0 * res.empirical_mean_se);
        CHECK(res.exp_moment_pass);
        CHECK_FALSE(res.tails.violation);
        CHECK(res.d == 2);
    }
    SUBCASE("quartic polynomial mean is 3/(n+2) at p = 2") {
        const int n = 40;
        const auto poly = ElementaryPolynomial::checked(4, Eigen::VectorXd::Ones(n), 2.0);
        const PolynomialTailResult res =
            run_polynomial_tails(2.0, n, poly, 4000, grid, RngState{62, 0});
        CHECK(res.exact_mean == doctest::Approx(3.0 / (n + 2.0)).epsilon(1e-12));
        CHECK(std::abs(res.empirical_mean - res.exact_mean) < 3.0 * res.empirical_mean_se);
        CHECK(res.exp_moment_pass);
        CHECK_FALSE(res.tails.violation);
        CHECK(res.d == 3);
    }
    SUBCASE("m <= p is rejected") {
        const auto poly = ElementaryPolynomial::checked(4, Eigen::VectorXd::Ones(10), 2.0);
        CHECK_THROWS_AS(run_polynomial_tails(4.0, 10, poly, 1000, grid, RngState{63, 0}),
                        std::domain_error);
    }
}

TEST_CASE("Q3 stddev scales like 1/n") {
    const std::vector<int> ns = {25, 50, 100, 200};
    const double slope = polynomial_stddev_slope(2.0, 3, ns, 3000, RngState{64, 0});
    CHECK(slope > -1.3);
    CHECK(slope < -0.7);
}

TEST_CASE("exchangeability: permuting coefficients leaves Q_m law unchanged") {
    const int n = 12, reps = 4000;
    Eigen::VectorXd a(n);
    for (int j = 0; j < n; ++j) a(j) = 1.0 / (1.0 + j); // non-uniform, max-norm 1
    Eigen::VectorXd a_perm = a.reverse();

    const auto poly = ElementaryPolynomial::checked(3, a, 2.0);
    const auto poly_perm = ElementaryPolynomial::checked(3, a_perm, 2.0);

    std::vector<double> qa(reps), qb(reps);
    for (int i = 0; i < reps; ++i) {
        CounterRng ra(RngState{65, static_cast<std::uint64_t>(i)});
        CounterRng rb(RngState{66, static_cast<std::uint64_t>(i)});
        qa[i] = poly(sample_cone(2.0, n, ra).theta);
        qb[i] = poly_perm(sample_cone(2.0, n, rb).theta);
    }
    CHECK(testutil::ks_statistic(qa, qb) < testutil::ks_critical(reps, reps, 0.01));
}

TEST_CASE("matrix norms for hanson-wright") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(9, 9);
    CHECK(matrix_hs_q_norm(id, 2.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(matrix_op_q_norm(id, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(matrix_op_q_norm(id, 4.0) == doctest::Approx(std::pow(9.0, 0.5)).epsilon(1e-12));

    Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(6, 6);
    pair(0, 1) = pair(1, 0) = 2.0;
    CHECK(matrix_op_q_norm(pair, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(matrix_op_q_norm(pair, 4.0) == doctest::Approx(2.0 * std::pow(2.0, 0.5)).epsilon(1e-12));
}

TEST_CASE("hanson-wright experiment") {
    const std::vector<double> grid = {0.0, 0.02, 0.05, 0.1, 0.2, 0.5};

    SUBCASE("p = 2 identity is degenerate") {
        const HansonWrightResult res = run_hanson_wright(
            2.0, 15, Eigen::MatrixXd::Identity(15, 15), 500, grid, RngState{67, 0});
        CHECK(res.exact_center == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 1; i < grid.size(); ++i) CHECK(res.tails.empirical_tail[i] == 0.0);
        CHECK(res.center_ok);
    }
    SUBCASE("p = 4 identity centers at n m2") {
        const int n = 20;
        const HansonWrightResult res = run_hanson_wright(
            4.0, n, Eigen::MatrixXd::Identity(n, n), 5000, grid, RngState{68, 0});
        CHECK(res.exact_center == doctest::Approx(n * exact_moment_cone(4.0, n, 2.0)).epsilon(1e-12));
        CHECK(res.center_ok);
        CHECK_FALSE(res.tails.violation);
    }
    SUBCASE("off-diagonal pair at p = 2") {
        const int n = 50;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        a(0, 1) = a(1, 0) = 1.0;
        const HansonWrightResult res = run_hanson_wright(2.0, n, a, 5000, grid, RngState{69, 0});
        CHECK(res.exact_center == 0.0);
        CHECK(res.center_ok);
        CHECK_FALSE(res.tails.violation);
    }
}

TEST_CASE("symmetric function families satisfy the structural properties") {
    for (const auto& fam : {family_x4_rademacher(), family_cos_rademacher(), family_linear()})
        CHECK(family_property_defect(fam, 10, RngState{70, 0}, 20) < 1e-9);
}

TEST_CASE("edgeworth residuals") {
    SUBCASE("x^4 family has ratio exactly 2") {
        const EdgeworthResult res = run_edgeworth(family_x4_rademacher(), 20, 500, RngState{71, 0});
        CHECK(res.residual_ratio_max == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(res.residual_ratio_mean == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(res.cubic_coeff == 0.0);
        CHECK(res.ratio_bounded);
    }
    SUBCASE("linear family vanishes") {
        const EdgeworthResult res = run_edgeworth(family_linear(), 20, 200, RngState{72, 0});
        CHECK(res.residual_ratio_max == 0.0);
        CHECK(res.ratio_bounded);
    }
    SUBCASE("cos family ratio is uniformly bounded") {
        const EdgeworthResult res = run_edgeworth(family_cos_rademacher(), 30, 1000, RngState{73, 0});
        CHECK(res.ratio_bounded);
        CHECK(res.residual_ratio_max < 0.1);
        CHECK(res.residual_ratio_max > 0.01); // the e^{-1/2}/12 ~ 0.05 signal is there
    }
}

TEST_CASE("symmetric-function tails") {
    std::vector<double> grid(26);
    for (int i = 0; i < 26; ++i) grid[i] = 2.4 * i;

    SUBCASE("x^4 family: mean statistic is about 6 and no violation") {
        const int n = 50, reps = 4000;
        const TailExperimentResult res =
            run_symmetric_tails(family_x4_rademacher(), n, reps, grid, RngState{74, 0});
        CHECK_FALSE(res.violation);
        // E n |h - h_inf| = 2 n E sum theta^4 = 6n/(n+2)
        std::vector<double> stats(reps);
        for (int i = 0; i < reps; ++i) {
            CounterRng stream(RngState{74, 0}.sub(i));
            const SphereSample s = sample_cone(2.0, n, stream);
            double s4 = 0.0;
            for (int j = 0; j < n; ++j) s4 += std::pow(s.theta(j), 4.0);
            stats[i] = n * 2.0 * s4;
        }
        CHECK(std::abs(mean(stats) - 6.0 * n / (n + 2.0)) < 3.0 * standard_error(stats));
    }
    SUBCASE("degenerate family concentrates at zero") {
        const TailExperimentResult res =
            run_symmetric_tails(family_linear(), 30, 500, grid, RngState{75, 0});
        for (std::size_t i = 1; i < grid.size(); ++i) CHECK(res.empirical_tail[i] == 0.0);
        CHECK_FALSE(res.violation);
    }
    SUBCASE("cos family shows no violation") {
        const TailExperimentResult res =
            run_symmetric_tails(family_cos_rademacher(), 50, 4000, grid, RngState{76, 0});
        CHECK_FALSE(res.violation);
    }
}

TEST_CASE("tail result serialization") {
    const std::vector<double> grid = {0.0, 0.5, 1.0};
    const TailExperimentResult res = run_lipschitz_tails(2.0, 10, SphereMeasure::cone,
                                                         lip_coordinate(), 500, grid,
                                                         RngState{77, 0});
    const std::string csv = res.to_csv();
    CHECK(csv.find("t,empirical_tail,empirical_stderr,certificate,certificate_raw") !=
          std::string::npos);
    CHECK(csv.find("# experiment=lipschitz_cone") != std::string::npos);

    const nlohmann::json j = res.to_json();
    CHECK(j["experiment"] == "lipschitz_cone");
    CHECK(j["pass_flags"]["no_violation"] == true);
    CHECK(j["grid"].size() == 3);
}

TEST_CASE("threaded runs reproduce the single-thread result exactly") {
    const std::vector<double> grid = {0.0, 0.2, 0.5};
    const TailExperimentResult a = run_lipschitz_tails(3.0, 15, SphereMeasure::surface,
                                                       lip_coordinate(), 800, grid,
                                                       RngState{78, 0}, 1);
    const TailExperimentResult b = run_lipschitz_tails(3.0, 15, SphereMeasure::surface,
                                                       lip_coordinate(), 800, grid,
                                                       RngState{78, 0}, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(a.empirical_tail[i] == b.empirical_tail[i]);
        CHECK(a.empirical_stderr[i] == b.empirical_stderr[i]);
    }
}
