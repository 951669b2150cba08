#include "conclab/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "conclab/reduce.hpp"

namespace conclab {

EntryDistribution EntryDistribution::gaussian() {
    // E|X|^3 = 2 sqrt(2/pi)
    return {Kind::standard_gaussian, 2.0 * std::sqrt(2.0 / M_PI), std::nullopt};
}

EntryDistribution EntryDistribution::rademacher() {
    return {Kind::rademacher, 1.0, 1.0};
}

EntryDistribution EntryDistribution::uniform_centered() {
    // uniform on [-sqrt(3), sqrt(3)]: E|X|^3 = 3 sqrt(3) / 4
    return {Kind::centered_custom, 3.0 * std::sqrt(3.0) / 4.0, std::sqrt(3.0)};
}

double EntryDistribution::draw(CounterRng& rng) const {
    switch (kind) {
    case Kind::standard_gaussian:
        return rng.next_gaussian();
    case Kind::rademacher:
        return rng.next_sign();
    case Kind::centered_custom:
        return std::sqrt(3.0) * (2.0 * rng.next_unit() - 1.0);
    }
    throw std::invalid_argument("EntryDistribution: unknown kind");
}

std::string EntryDistribution::name() const {
    switch (kind) {
    case Kind::standard_gaussian: return "gaussian";
    case Kind::rademacher: return "rademacher";
    case Kind::centered_custom: return "uniform";
    }
    return "unknown";
}

Eigen::MatrixXd sample_entry_matrix(const EntryDistribution& dist, int n, CounterRng& rng) {
    if (n < 1) throw std::domain_error("sample_entry_matrix: n >= 1 required");
    Eigen::MatrixXd x(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = dist.draw(rng);
            x(i, j) = v;
            x(j, i) = v;
        }
    }
    return x;
}

double OrthogonalMatrix::orthogonality_defect() const {
    Eigen::MatrixXd g = entries.transpose() * entries;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

OrthogonalMatrix sample_haar_so(int n, CounterRng& rng) {
    if (n < 2) throw std::domain_error("sample_haar_so: n >= 2 required");
    Eigen::MatrixXd a(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) a(i, j) = rng.next_gaussian();

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd& qrm = qr.matrixQR();
    for (int j = 0; j < n; ++j)
        if (qrm(j, j) < 0.0) q.col(j) = -q.col(j);

    if (q.determinant() < 0.0) q.col(n - 1) = -q.col(n - 1);

    OrthogonalMatrix o{n, std::move(q)};
    if (o.orthogonality_defect() > 1e-10)
        throw std::runtime_error("sample_haar_so: orthogonality defect above 1e-10");
    if (std::abs(o.entries.determinant() - 1.0) > 1e-8)
        throw std::runtime_error("sample_haar_so: determinant not +1 within 1e-8");
    return o;
}

Eigen::VectorXd sample_p_gaussian(double p, int n, CounterRng& rng) {
    if (p < 2.0) throw std::domain_error("sample_p_gaussian: p >= 2 required");
    if (n < 1) throw std::domain_error("sample_p_gaussian: n >= 1 required");
    Eigen::VectorXd z(n);
    const double inv_p = 1.0 / p;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gamma(inv_p, p);
        z(i) = rng.next_sign() * std::pow(g, inv_p);
    }
    return z;
}

double lp_norm(const Eigen::VectorXd& x, double p_exponent) {
    const double m = x.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)) / m, p_exponent);
    return m * std::pow(s, 1.0 / p_exponent);
}

Eigen::VectorXd signed_power(const Eigen::VectorXd& x, double e) {
    Eigen::VectorXd y(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double a = std::abs(x(i));
        y(i) = (x(i) < 0.0 ? -1.0 : 1.0) * std::pow(a, e);
    }
    return y;
}

double surface_density_factor(const Eigen::VectorXd& theta, double p) {
    return signed_power(theta, p - 1.0).norm();
}

SphereSample sample_cone(double p, int n, CounterRng& rng) {
    if (n < 2) throw std::domain_error("sample_cone: n >= 2 required");
    Eigen::VectorXd z = sample_p_gaussian(p, n, rng);
    z /= lp_norm(z, p);
    // second normalization pass pins |theta|_p to 1 within a few ulps
    z /= lp_norm(z, p);
    return {p, std::move(z), 1.0};
}

SphereSample sample_surface_rejection(double p, int n, CounterRng& rng) {
    for (;;) {
        SphereSample s = sample_cone(p, n, rng);
        const double h = surface_density_factor(s.theta, p); // <= 1 on the sphere
        if (rng.next_unit() <= h) return s;
    }
}

MonteCarloEstimate surface_expectation(double p, int n,
                                       const std::function<double(const Eigen::VectorXd&)>& integrand,
                                       int replicas, RngState rng, int threads) {
    if (replicas < 100) throw std::domain_error("surface_expectation: replicas >= 100 required");
    std::vector<double> g(replicas), h(replicas);
    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        SphereSample s = sample_cone(p, n, stream);
        h[i] = surface_density_factor(s.theta, p);
        g[i] = integrand(s.theta);
    });

    const double hw = pairwise_sum(h);
    if (!(hw > 0.0)) throw std::runtime_error("surface_expectation: total importance weight is zero");

    std::vector<double> gh(replicas);
    for (int i = 0; i < replicas; ++i) gh[i] = g[i] * h[i];
    const double est = pairwise_sum(gh) / hw;

    // delta-method variance of the ratio estimator
    std::vector<double> dev(replicas);
    for (int i = 0; i < replicas; ++i) dev[i] = h[i] * (g[i] - est) * h[i] * (g[i] - est);
    const double se = std::sqrt(pairwise_sum(dev)) / hw;
    return {est, se};
}

} // namespace conclab
