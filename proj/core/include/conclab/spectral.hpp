#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace conclab {

/// Spectral parameter z with nonzero imaginary part v = Im(z). Operations
/// that sit under the local-law hypothesis additionally require |v| <= 1;
/// that check lives in those operations, not here.
struct SpectralPoint {
    std::complex<double> z;

    explicit SpectralPoint(std::complex<double> zz);
    SpectralPoint(double re, double im) : SpectralPoint(std::complex<double>(re, im)) {}

    double v() const { return z.imag(); }
};

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // columns, orthogonal
};

/// Resolvent R(z) = (M - zI)^{-1} of a real symmetric M. Complex-symmetric,
/// with max_ij |R_ij| <= 1/|v|.
struct Resolvent {
    int n = 0;
    Eigen::MatrixXcd entries;
    SpectralPoint z;
};

/// Dense symmetric eigendecomposition; throws std::domain_error when M is
/// not symmetric within 1e-12.
EigenDecomposition eigen_symmetric(const Eigen::MatrixXd& m);

Resolvent resolvent(const Eigen::MatrixXd& m, SpectralPoint z);
/// Spectral route reusing one decomposition across many z.
Resolvent resolvent(const EigenDecomposition& ed, SpectralPoint z);

/// Empirical Stieltjes transform (1/n) tr((M - zI)^{-1}) = (1/n) sum 1/(lambda_k - z).
std::complex<double> stieltjes_empirical(const Eigen::MatrixXd& m, SpectralPoint z);
std::complex<double> stieltjes_empirical(const EigenDecomposition& ed, SpectralPoint z);

/// Stieltjes transform of the semicircle law: the root of s^2 + z s + 1 = 0
/// with Im(s) >= 0 on the upper half-plane (and Im(s) <= 0 below).
std::complex<double> semicircle_stieltjes(SpectralPoint z);

/// Compares the closed-form resolvent derivatives
///   dR/dM_ij      = -R (E_ij + E_ji) R (1 - 1/2 [i=j])
///   d tr(R)/dM_ij = -(R^2)_ij (1 + [i != j])
/// against central finite differences in the symmetric coordinate M_ij;
/// returns the larger of the two relative errors.
double resolvent_derivative_check(const Eigen::MatrixXd& m, int i, int j, SpectralPoint z, double h);

/// A differentiable matrix path t -> M(t) with its analytic derivative.
struct MatrixPath {
    std::function<Eigen::MatrixXd(double)> value;
    std::function<Eigen::MatrixXd(double)> derivative;
};

/// Verifies the matrix-calculus identities
///   d M^{-1}/dt = -M^{-1} M' M^{-1}
///   d M^2/dt    = M' M + M M'
///   d M^{-2}/dt = -M^{-1} M' M^{-2} - M^{-2} M' M^{-1}
/// and the chain rule d f(M(t))/dt = <grad f(M), M'>_HS for f(M) = tr(M^2),
/// all by central differences at t0; returns the max relative error.
/// Near-singular M(t0) (condition estimate above 1e12) is a domain error.
double matrix_calculus_check(const MatrixPath& path, double t0, double h);

} // namespace conclab
