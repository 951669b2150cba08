#include "conclab/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace conclab {

SpectralPoint::SpectralPoint(std::complex<double> zz) : z(zz) {
    if (z.imag() == 0.0) throw std::domain_error("SpectralPoint: Im(z) must be nonzero");
}

EigenDecomposition eigen_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::domain_error("eigen_symmetric: square matrix required");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::domain_error("eigen_symmetric: matrix not symmetric within 1e-12");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen_symmetric: solver failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Resolvent resolvent(const EigenDecomposition& ed, SpectralPoint z) {
    const int n = static_cast<int>(ed.eigenvalues.size());
    Eigen::VectorXcd inv(n);
    for (int k = 0; k < n; ++k) inv(k) = 1.0 / (std::complex<double>(ed.eigenvalues(k), 0.0) - z.z);

    Eigen::MatrixXcd r = ed.eigenvectors.cast<std::complex<double>>() * inv.asDiagonal() *
                         ed.eigenvectors.transpose().cast<std::complex<double>>();

    const double cap = 1.0 / std::abs(z.v()) + 1e-9;
    if (r.cwiseAbs().maxCoeff() > cap)
        throw std::runtime_error("resolvent: entrywise bound 1/|v| violated");
    return {n, std::move(r), z};
}

Resolvent resolvent(const Eigen::MatrixXd& m, SpectralPoint z) {
    return resolvent(eigen_symmetric(m), z);
}

std::complex<double> stieltjes_empirical(const EigenDecomposition& ed, SpectralPoint z) {
    std::complex<double> s(0.0, 0.0);
    for (int k = 0; k < ed.eigenvalues.size(); ++k)
        s += 1.0 / (std::complex<double>(ed.eigenvalues(k), 0.0) - z.z);
    return s / static_cast<double>(ed.eigenvalues.size());
}

std::complex<double> stieltjes_empirical(const Eigen::MatrixXd& m, SpectralPoint z) {
    return stieltjes_empirical(eigen_symmetric(m), z);
}

std::complex<double> semicircle_stieltjes(SpectralPoint z) {
    const std::complex<double> w = std::sqrt(z.z * z.z - 4.0);
    const std::complex<double> s1 = 0.5 * (-z.z + w);
    const std::complex<double> s2 = 0.5 * (-z.z - w);
    // roots have imaginary parts of opposite sign for z off the real axis
    if (z.v() > 0.0) return s1.imag() >= 0.0 ? s1 : s2;
    return s1.imag() <= 0.0 ? s1 : s2;
}

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double relative_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double scale = std::max(max_abs(a), 1e-300);
    return max_abs(a - b) / scale;
}

double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace

double resolvent_derivative_check(const Eigen::MatrixXd& m, int i, int j, SpectralPoint z, double h) {
    if (!(h >= 1e-7 && h <= 1e-3))
        throw std::domain_error("resolvent_derivative_check: h must lie in [1e-7, 1e-3]");
    const int n = static_cast<int>(m.rows());
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw std::domain_error("resolvent_derivative_check: index out of range");

    const Resolvent r = resolvent(m, z);
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
    e(i, j) += 1.0;
    e(j, i) += 1.0;
    const double diag_factor = (i == j) ? 0.5 : 1.0;
    const Eigen::MatrixXcd analytic = -diag_factor * (r.entries * e * r.entries);

    Eigen::MatrixXd mp = m, mm = m;
    mp(i, j) += h;
    mm(i, j) -= h;
    if (i != j) {
        mp(j, i) += h;
        mm(j, i) -= h;
    }
    const Resolvent rp = resolvent(mp, z);
    const Resolvent rm = resolvent(mm, z);
    const Eigen::MatrixXcd fd = (rp.entries - rm.entries) / (2.0 * h);

    double err = relative_gap(analytic, fd);

    const Eigen::MatrixXcd r2 = r.entries * r.entries;
    const std::complex<double> trace_analytic = -r2(i, j) * (i == j ? 1.0 : 2.0);
    const std::complex<double> trace_fd = (rp.entries.trace() - rm.entries.trace()) / (2.0 * h);
    err = std::max(err, std::abs(trace_analytic - trace_fd) / std::max(std::abs(trace_analytic), 1e-300));
    return err;
}

double matrix_calculus_check(const MatrixPath& path, double t0, double h) {
    const Eigen::MatrixXd m = path.value(t0);
    const Eigen::MatrixXd md = path.derivative(t0);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e12)
        throw std::domain_error("matrix_calculus_check: M(t0) near-singular");

    const Eigen::MatrixXd mp = path.value(t0 + h);
    const Eigen::MatrixXd mm = path.value(t0 - h);
    const Eigen::MatrixXd inv = m.inverse();

    // d M^{-1}/dt
    const Eigen::MatrixXd fd_inv = (mp.inverse() - mm.inverse()) / (2.0 * h);
    double err = relative_gap(Eigen::MatrixXd(-inv * md * inv), fd_inv);

    // d M^2/dt
    const Eigen::MatrixXd fd_sq = (mp * mp - mm * mm) / (2.0 * h);
    err = std::max(err, relative_gap(Eigen::MatrixXd(md * m + m * md), fd_sq));

    // d M^{-2}/dt
    const Eigen::MatrixXd inv2 = inv * inv;
    const Eigen::MatrixXd fd_invsq = (mp.inverse() * mp.inverse() - mm.inverse() * mm.inverse()) / (2.0 * h);
    err = std::max(err, relative_gap(Eigen::MatrixXd(-inv * md * inv2 - inv2 * md * inv), fd_invsq));

    // chain rule for f(M) = tr(M^2): grad f = 2 M^T
    const double fd_chain = ((mp * mp).trace() - (mm * mm).trace()) / (2.0 * h);
    const double analytic_chain = (2.0 * m.transpose()).cwiseProduct(md).sum();
    err = std::max(err, std::abs(analytic_chain - fd_chain) / std::max(std::abs(analytic_chain), 1e-300));

    return err;
}

} // namespace conclab
