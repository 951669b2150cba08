#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "conclab/rng.hpp"

namespace conclab {

/// Scalar entry law for the symmetric random matrix X. Every kind has mean 0
/// and variance 1; m3 stores the exact third absolute moment E|X|^3 and
/// bound_k the almost-sure bound when one exists.
struct EntryDistribution {
    enum class Kind { standard_gaussian, rademacher, centered_custom };

    Kind kind = Kind::standard_gaussian;
    double m3 = 0.0;
    std::optional<double> bound_k;

    static EntryDistribution gaussian();
    static EntryDistribution rademacher();
    /// Uniform on [-sqrt(3), sqrt(3)] (mean 0, variance 1).
    static EntryDistribution uniform_centered();

    double draw(CounterRng& rng) const;
    std::string name() const;
};

/// A sample from SO(n): O^T O = I to 1e-10 and det O = +1 to 1e-8, both
/// checked at construction time.
struct OrthogonalMatrix {
    int n = 0;
    Eigen::MatrixXd entries;

    double orthogonality_defect() const; // max-abs entry of O^T O - I
};

/// A point on the l_p unit sphere. importance_weight is 1 for cone-measure
/// samples and |theta^{p-1}|_2 when the sample is tagged for
/// surface-measure reweighting.
struct SphereSample {
    double p = 2.0;
    Eigen::VectorXd theta;
    double importance_weight = 1.0;
};

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Symmetric n x n matrix with i.i.d. upper-triangle (incl. diagonal)
/// entries from dist, lower triangle mirrored.
Eigen::MatrixXd sample_entry_matrix(const EntryDistribution& dist, int n, CounterRng& rng);

/// Haar-distributed element of SO(n): QR of an i.i.d. Gaussian matrix with
/// the R-diagonal sign fix (Haar on O(n)), then one column negated when
/// det = -1.
OrthogonalMatrix sample_haar_so(int n, CounterRng& rng);

/// i.i.d. coordinates with density c_p exp(-|x|^p / p), p >= 2.
/// Drawn as sign * G^{1/p} with G ~ Gamma(1/p, scale p).
Eigen::VectorXd sample_p_gaussian(double p, int n, CounterRng& rng);

/// Cone-measure sample on the l_p sphere: Z / |Z|_p.
SphereSample sample_cone(double p, int n, CounterRng& rng);

/// Surface-measure sample by rejection against the cone measure with
/// acceptance probability |theta^{p-1}|_2 <= 1. Exact, but acceptance decays
/// like n^{1/p - 1/2}; kept as a small-n oracle for the importance-weighted
/// route.
SphereSample sample_surface_rejection(double p, int n, CounterRng& rng);

/// Self-normalized importance estimate of a surface-measure expectation,
/// E_nu[g] ~= sum g(theta_i) h(theta_i) / sum h(theta_i) with cone samples
/// theta_i and h(theta) = |theta^{p-1}|_2. Standard error by the delta
/// method for ratio estimators. One stream per replica; reduction is
/// pairwise and order-fixed.
MonteCarloEstimate surface_expectation(double p, int n,
                                       const std::function<double(const Eigen::VectorXd&)>& integrand,
                                       int replicas, RngState rng, int threads = 1);

/// l_p norm; p_exponent may be any positive real.
double lp_norm(const Eigen::VectorXd& x, double p_exponent);

/// Entrywise sign(x_i) |x_i|^e.
Eigen::VectorXd signed_power(const Eigen::VectorXd& x, double e);

/// |theta^{p-1}|_2, the (unnormalized) surface/cone density ratio.
double surface_density_factor(const Eigen::VectorXd& theta, double p);

} // namespace conclab
