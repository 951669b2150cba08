#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "conclab/certificates.hpp"
#include "conclab/geometry.hpp"
#include "conclab/rng.hpp"
#include "conclab/sampling.hpp"
#include "conclab/spectral.hpp"

namespace conclab {

// --- Result containers -----------------------------------------------------

/// Empirical tail curve of a statistic against a closed-form certificate.
/// The violation flag is set iff empirical - 3 stderr exceeds the
/// (probability-capped) certificate at some grid point.
struct TailExperimentResult {
    std::string experiment;
    std::vector<double> t_grid;
    std::vector<double> empirical_tail;
    std::vector<double> empirical_stderr;
    std::vector<double> certificate;     // capped at 1 (probability view)
    std::vector<double> certificate_raw; // uncapped, for plots
    int n = 0;
    double p = 0.0;
    int replicas = 0;
    std::uint64_t seed = 0;
    bool violation = false;
    double inner_noise = 0.0; // mean inner-loop stderr, nested experiments only
    std::map<std::string, double> constants_used;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

struct LocalLawPoint {
    int n = 0;
    std::complex<double> mean_s;
    double std_error = 0.0; // of |mean_s|, combined re/im
    double deviation = 0.0; // |mean_s - s(z)|
    double rate = 0.0;      // cert_local_law_rate at this n
};

struct LocalLawResult {
    std::vector<LocalLawPoint> points;
    std::complex<double> semicircle_value;
    double slope = 0.0; // log deviation vs log n
    bool deviations_decreasing = false;
    bool outside_hypothesis = false; // |v| > 1: warned, still run
    std::complex<double> z;
    int replicas = 0;
    std::uint64_t seed = 0;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

// --- Test-function and family catalogs ---------------------------------------

/// Lipschitz test function with a certified Lipschitz constant w.r.t. the
/// l_p norm (experiments divide by it, so the tested function is 1-Lipschitz).
struct LipschitzTestFunction {
    std::string name;
    SmoothFunction fn;
    std::function<double(double p, int n)> lipschitz_p;
};

LipschitzTestFunction lip_coordinate();     // theta -> theta_1, constant 1
LipschitzTestFunction lip_euclidean_norm(); // theta -> |theta|_2, constant n^{1/q - 1/2}
LipschitzTestFunction lip_constant();       // theta -> 1 (degenerate edge case)

struct LsqTestFunction {
    std::string name;
    SmoothFunction fn;
};

/// The three shipped smooth test functions: 1, theta_1, 1 + theta_1 theta_2.
std::vector<LsqTestFunction> lsq_builtin_functions();

/// Elementary polynomial Q_m(theta) = sum a_j theta_j^m with the coefficient
/// constraint |a|_{p/(p-2)} <= 1 (max-norm when p = 2) checked at
/// construction.
struct ElementaryPolynomial {
    int m = 3;
    Eigen::VectorXd a;

    static ElementaryPolynomial checked(int m, Eigen::VectorXd a, double p);
    double operator()(const Eigen::VectorXd& theta) const;
};

/// |a|_{p/(p-2)}; the max-norm for p = 2.
double coefficient_norm(const Eigen::VectorXd& a, double p);

/// Sequence h_n(theta) = E f(sum theta_j X_j) with coordinate-insertion
/// consistency, vanishing first partials at zero and permutation symmetry.
/// h evaluates any dimension; h_inf is the rotation-invariant limit at
/// |theta|_2 = 1 and cubic_coeff the signed third derivative of the limit
/// function at 0 (B* is its absolute value).
struct SymmetricFunctionFamily {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> h;
    double h_inf = 0.0;
    double cubic_coeff = 0.0;
    double deriv_bound = 1.0; // B, on the unit ball
    double gamma = 1.0;       // gamma with |R_4| <= gamma B sum theta^4

    double b_star() const { return std::abs(cubic_coeff); }
};

/// f(x) = x^4 with Rademacher entries: h_n = 3 (sum theta^2)^2 - 2 sum theta^4,
/// h_inf = 3, cubic coefficient 0, R_4 / sum theta^4 = -2 exactly.
SymmetricFunctionFamily family_x4_rademacher();
/// f(x) = cos(x) with Rademacher entries: h_n = prod cos(theta_j), h_inf = e^{-1/2}.
SymmetricFunctionFamily family_cos_rademacher();
/// f linear: h_n identically 0.
SymmetricFunctionFamily family_linear();

/// Max violation of the three family properties (insertion consistency,
/// vanishing partial at 0, permutation symmetry) over random probes.
double family_property_defect(const SymmetricFunctionFamily& fam, int n, RngState rng,
                              int trials = 20);

// --- Matrix norms for the Hanson-Wright experiment ---------------------------

/// ||A||_{HS(q)} = (sum |a_ij|^q)^{1/q}.
double matrix_hs_q_norm(const Eigen::MatrixXd& a, double q);

/// sup { x^T A y : x, y on the l_p unit sphere }. Exact for diagonal
/// matrices (|diag|_{p/(p-2)}) and for single symmetric off-diagonal pairs
/// (|a| 2^{1-2/p}); otherwise the valid upper bound ||A||_{HS(q)}.
double matrix_op_q_norm(const Eigen::MatrixXd& a, double p);

// --- Experiments -------------------------------------------------------------

/// Local semicircle law trend: for each n, average s_Theta(z) over fresh
/// (O, X) pairs and compare with the semicircle transform.
LocalLawResult run_local_law(std::span<const int> n_list, SpectralPoint z,
                             const EntryDistribution& dist, int outer_replicas, RngState rng,
                             int threads = 1);

enum class SudakovExperiment {
    theta_nested, // E_X s_Theta(z) as a function of O; inner loop estimates E_X
    x_pointwise,  // s_Theta(z) at fixed Theta, varying Gaussian X
};

TailExperimentResult run_sudakov_tails(int n, SpectralPoint z, const EntryDistribution& dist,
                                       int outer, int inner, std::span<const double> t_grid,
                                       RngState rng,
                                       SudakovExperiment variant = SudakovExperiment::theta_nested,
                                       int threads = 1);

enum class SphereMeasure { cone, surface };

TailExperimentResult run_lipschitz_tails(double p, int n, SphereMeasure measure,
                                         const LipschitzTestFunction& f, int replicas,
                                         std::span<const double> t_grid, RngState rng,
                                         int threads = 1);

/// Plug-in Monte Carlo check of the LS_q inequality on the cone measure:
/// entropy of |f|^q against sigma^q integral |grad f|_q^q.
struct LsqCheckResult {
    std::string function_name;
    double p = 0.0, q = 0.0;
    int n = 0, replicas = 0;
    double entropy = 0.0, entropy_se = 0.0;
    double energy = 0.0, energy_se = 0.0; // E |grad f|_q^q and its stderr
    double sigma_q = 0.0;
    double bound = 0.0; // sigma_q * energy
    bool pass = false;  // entropy <= 1.1 bound + 3 combined stderr
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

LsqCheckResult run_lsq_empirical(double p, int n, const LsqTestFunction& f, int replicas,
                                 RngState rng, int threads = 1);

/// Elementary-polynomial tails plus the exponential-moment check at the
/// conservative constant assembled from the higher-order exp-moment theorem:
/// the actual derivative norms of Q_m are computed from exact moments, the
/// polynomial is rescaled by lambda to meet the theorem hypotheses, and
/// c_used = c_{p,d} lambda^{p/d}.
struct PolynomialTailResult {
    TailExperimentResult tails;
    int d = 0;
    double exact_mean = 0.0;
    double empirical_mean = 0.0, empirical_mean_se = 0.0;
    double lambda = 0.0;
    double c_used = 0.0;
    double exp_moment_mean = 0.0, exp_moment_se = 0.0;
    bool exp_moment_pass = false; // mean <= 2 + 3 stderr
    std::vector<double> derivative_norms;
};

PolynomialTailResult run_polynomial_tails(double p, int n, const ElementaryPolynomial& poly,
                                          int replicas, std::span<const double> t_grid,
                                          RngState rng, int threads = 1);

/// Log-log slope of the sample stddev of Q_m across n_list (all-ones
/// coefficients).
double polynomial_stddev_slope(double p, int m, std::span<const int> n_list, int replicas,
                               RngState rng, int threads = 1);

struct HansonWrightResult {
    TailExperimentResult tails;
    double exact_center = 0.0;
    double empirical_mean = 0.0, empirical_mean_se = 0.0;
    double a_hs_q = 0.0, a_op_q = 0.0, sigma = 0.0;
    bool center_ok = false; // |empirical - exact| <= 3 stderr
};

HansonWrightResult run_hanson_wright(double p, int n, const Eigen::MatrixXd& a, int replicas,
                                     std::span<const double> t_grid, RngState rng,
                                     double c_p = 1.0, int threads = 1);

/// Edgeworth residual check: R_4 = h_n - h_inf - (cubic/6) sum theta^3 over
/// cone-measure samples on the Euclidean sphere; reports the max of
/// |R_4| / sum theta^4 and whether it stays within the configured gamma B.
struct EdgeworthResult {
    std::string family;
    int n = 0, replicas = 0;
    double residual_ratio_max = 0.0;
    double residual_ratio_mean = 0.0;
    double gamma_b = 0.0;
    bool ratio_bounded = false;
    double cubic_coeff = 0.0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

EdgeworthResult run_edgeworth(const SymmetricFunctionFamily& fam, int n, int replicas,
                              RngState rng, int threads = 1);

/// Tails of n |h_n(theta) - h_inf| against the explicit
/// 5 exp(-min(2/(3B*), 1/(78 gamma B)) t) certificate.
TailExperimentResult run_symmetric_tails(const SymmetricFunctionFamily& fam, int n, int replicas,
                                         std::span<const double> t_grid, RngState rng,
                                         int threads = 1);

/// Pool-adjacent-violators pass enforcing a nonincreasing curve; empirical
/// tails are monotone by construction, this guards post-processed inputs.
std::vector<double> isotonic_nonincreasing(std::span<const double> y);

} // namespace conclab
