#include "conclab/weights.hpp"

#include <cmath>
#include <stdexcept>

namespace conclab {

double WeightMatrix::hadamard_row_defect() const {
    const Eigen::MatrixXd sq = theta.cwiseProduct(theta);
    return (sq.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

WeightMatrix build_theta(const OrthogonalMatrix& o) {
    const int n = o.n;
    Eigen::MatrixXd th(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = std::sqrt(0.5 * (o.entries(i, j) * o.entries(i, j) +
                                              o.entries(j, i) * o.entries(j, i)));
            th(i, j) = v;
            th(j, i) = v;
        }
    return {n, std::move(th), o};
}

MaxWeightTailBound max_weight_tail_certificate(int n, double t) {
    if (n < 4) throw std::domain_error("max_weight_tail_certificate: n >= 4 required");
    if (t < 0.0) throw std::domain_error("max_weight_tail_certificate: t >= 0 required");

    MaxWeightTailBound out;
    out.threshold = t * std::sqrt(std::log(static_cast<double>(n)) / n);
    if (t == 0.0) {
        out.bound = 1.0;
        return out;
    }
    const double prefactor = 8.0 / (t * std::sqrt(2.0 * M_PI));
    const double raw = prefactor * std::pow(static_cast<double>(n), -t * t / 8.0 + 2.0);
    out.bound = std::min(1.0, raw);
    if (t >= std::sqrt(40.0))
        out.simplified = std::min(1.0, prefactor * std::pow(static_cast<double>(n), -3.0));
    return out;
}

} // namespace conclab
