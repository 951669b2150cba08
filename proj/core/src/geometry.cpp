#include "conclab/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "conclab/reduce.hpp"
#include "conclab/sampling.hpp"

namespace conclab {

TangentFrame make_tangent_frame(const Eigen::VectorXd& theta, double p) {
    if (theta.size() == 0 || theta.cwiseAbs().maxCoeff() == 0.0)
        throw std::domain_error("make_tangent_frame: theta must be nonzero");
    return {theta, signed_power(theta, p - 1.0), p};
}

Eigen::VectorXd tangent_project(const Eigen::VectorXd& theta, const Eigen::VectorXd& y, double p) {
    const TangentFrame frame = make_tangent_frame(theta, p);
    const Eigen::VectorXd unit = frame.theta_prime / frame.theta_prime.norm();
    return y - y.dot(unit) * unit;
}

Eigen::VectorXd intrinsic_gradient(const SmoothFunction& f, const Eigen::VectorXd& theta, double p) {
    return tangent_project(theta, f.gradient(theta), p);
}

double normalized_extension_defect(const SmoothFunction& f, const Eigen::VectorXd& theta, double p,
                                   double h) {
    const auto u = [&](const Eigen::VectorXd& x) {
        return f.value(x / lp_norm(x, p));
    };
    const int n = static_cast<int>(theta.size());
    Eigen::VectorXd grad_u(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = theta, xm = theta;
        xp(i) += h;
        xm(i) -= h;
        grad_u(i) = (u(xp) - u(xm)) / (2.0 * h);
    }
    const Eigen::VectorXd gs = intrinsic_gradient(f, theta, p);
    const Eigen::VectorXd tp = signed_power(theta, p - 1.0);
    const Eigen::VectorXd analytic = gs - gs.dot(theta) * tp;
    return (grad_u - analytic).cwiseAbs().maxCoeff();
}

double sectional_curvature(const Eigen::VectorXd& x, int i, int j, double p) {
    const int n = static_cast<int>(x.size());
    if (n < 3) throw std::domain_error("sectional_curvature: n >= 3 required");
    if (!(0 <= i && i < j && j <= n - 2))
        throw std::domain_error("sectional_curvature: need 0 <= i < j <= n-2");
    if (x.minCoeff() < 0.0)
        throw std::domain_error("sectional_curvature: positive-orthant chart requires x >= 0");
    if (!(x(n - 1) > 0.0))
        throw std::domain_error("sectional_curvature: chart invalid, x_n must be positive");

    // chart exponent of the appendix formula; not the Hoelder conjugate
    const double qc = p - 1.0;
    const double xi = x(i), xj = x(j), xn = x(n - 1);
    const double num = (p - 1.0) * (p - 1.0) * std::pow(xi * xj * xn, p - 2.0) *
                       (std::pow(xi, p) + std::pow(xj, p) + std::pow(xn, p));
    double sum_all = 0.0;
    for (int k = 0; k < n; ++k) sum_all += std::pow(x(k), 2.0 * qc);
    const double den = (std::pow(xi, 2.0 * qc) + std::pow(xj, 2.0 * qc) + std::pow(xn, 2.0 * qc)) * sum_all;
    return num / den;
}

namespace {

// Point on the sphere with x_0 = eps and the remaining mass spread evenly.
Eigen::VectorXd boundary_path_point(double p, int n, double eps) {
    Eigen::VectorXd x(n);
    const double rest = std::pow((1.0 - std::pow(eps, p)) / (n - 1), 1.0 / p);
    x.setConstant(rest);
    x(0) = eps;
    return x;
}

} // namespace

RicciVanishingReport ricci_vanishing_check(double p, int n) {
    if (!(p > 2.0)) throw std::domain_error("ricci_vanishing_check: p > 2 required");
    if (n < 3) throw std::domain_error("ricci_vanishing_check: n >= 3 required");

    RicciVanishingReport report;
    std::vector<double> log_eps, log_k;
    for (double eps = 1e-1; eps >= 0.99e-4; eps /= 10.0) {
        const double k = sectional_curvature(boundary_path_point(p, n, eps), 0, 1, p);
        report.epsilons.push_back(eps);
        report.curvatures.push_back(k);
        log_eps.push_back(std::log(eps));
        log_k.push_back(std::log(k));
    }
    report.fitted_exponent = fit_slope(log_eps, log_k);

    Eigen::VectorXd sym(n);
    sym.setConstant(std::pow(static_cast<double>(n), -1.0 / p));
    report.interior_curvature = sectional_curvature(sym, 0, 1, p);
    return report;
}

} // namespace conclab
