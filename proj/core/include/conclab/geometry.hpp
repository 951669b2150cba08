#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace conclab {

/// A scalar field on (a neighborhood of) the sphere with its analytic
/// ambient gradient.
struct SmoothFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// theta on the l_p sphere together with theta' = sign(theta)|theta|^{p-1};
/// |theta|_p = 1 forces |theta'|_q = 1 for the Hoelder conjugate q.
struct TangentFrame {
    Eigen::VectorXd theta;
    Eigen::VectorXd theta_prime;
    double p = 2.0;
};

TangentFrame make_tangent_frame(const Eigen::VectorXd& theta, double p);

/// Orthogonal projection onto the tangent space of the l_p sphere at theta:
/// P(y) = y - <y, theta'/|theta'|_2> theta'/|theta'|_2.
Eigen::VectorXd tangent_project(const Eigen::VectorXd& theta, const Eigen::VectorXd& y, double p);

/// Intrinsic gradient grad_S f(theta) = P_theta grad f(theta).
Eigen::VectorXd intrinsic_gradient(const SmoothFunction& f, const Eigen::VectorXd& theta, double p);

/// Max-abs error of the normalized-extension identity
/// grad u(theta) = grad_S f(theta) - <grad_S f(theta), theta> theta' for
/// u(x) = f(x/|x|_p), with grad u taken by central differences.
double normalized_extension_defect(const SmoothFunction& f, const Eigen::VectorXd& theta, double p,
                                   double h = 1e-5);

/// Sectional curvature of the l_p sphere in the plane (X_i, X_j) at a point
/// x in the positive-orthant chart (all coordinates >= 0, x_n > 0):
///   K = (p-1)^2 (x_i x_j x_n)^{p-2} (x_i^p + x_j^p + x_n^p)
///       / ((x_i^{2q'} + x_j^{2q'} + x_n^{2q'}) * sum_k x_k^{2q'})
/// where q' = p - 1 (the chart exponent, not the Hoelder conjugate used
/// elsewhere). Indices are zero-based with 0 <= i < j <= n-2.
double sectional_curvature(const Eigen::VectorXd& x, int i, int j, double p);

/// Report of the curvature degeneration that forces c(S_p^{n-1}) = 0 for
/// p > 2: K along a path with one coordinate shrinking to zero, its fitted
/// log-log decay exponent (p - 2 in theory), and K at the symmetric interior
/// point for contrast.
struct RicciVanishingReport {
    std::vector<double> epsilons;
    std::vector<double> curvatures;
    double fitted_exponent = 0.0;
    double interior_curvature = 0.0;
};

RicciVanishingReport ricci_vanishing_check(double p, int n);

} // namespace conclab
