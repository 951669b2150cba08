#include "conclab/exact_moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conclab {

double exact_moment_cone(double p, int n, double v) {
    if (v < 0.0) throw std::domain_error("exact_moment_cone: v >= 0 required");
    if (p < 1.0) throw std::domain_error("exact_moment_cone: p >= 1 required");
    if (n < 1) throw std::domain_error("exact_moment_cone: n >= 1 required");
    const double nn = static_cast<double>(n);
    const double lg = std::lgamma((1.0 + v) / p) - std::lgamma(1.0 / p) +
                      std::lgamma(nn / p) - std::lgamma((v + nn) / p);
    return std::exp(lg);
}

double cone_moment_upper_bound(double p, int n, double v) {
    const double nn = static_cast<double>(n);
    if (v <= p)
        return std::pow(nn + v, 1.0 - v / p) / nn;
    if (v <= 2.0 * p)
        return std::pow(p + 1.0, v / p - 1.0) * std::pow(nn, -v / p);
    return std::pow(1.0 + v, v / p - 1.0) * std::pow(nn + p, 1.0 - v / p) / nn;
}

double exact_neg_moment_pgauss(double p, int n, double v) {
    if (!(static_cast<double>(n) > v)) throw std::domain_error("exact_neg_moment_pgauss: n > v required");
    if (v < 0.0) throw std::domain_error("exact_neg_moment_pgauss: v >= 0 required");
    const double nn = static_cast<double>(n);
    const double lg = std::lgamma((nn - v) / p) - std::lgamma(nn / p) - (v / p) * std::log(p);
    return std::exp(lg);
}

double neg_moment_upper_bound(double p, int n, double v) {
    if (v > p) throw std::domain_error("neg_moment_upper_bound: v <= p required");
    const double nn = static_cast<double>(n);
    return std::pow(nn, 1.0 - v / p) / (nn - v);
}

double density_l2_bound(double p) {
    if (p < 2.0) throw std::domain_error("density_l2_bound: p >= 2 required");
    return std::pow(p + 1.0, 0.5 - 1.0 / p);
}

double moment_to_expmoment(double gamma) {
    if (!(gamma > 0.0)) throw std::domain_error("moment_to_expmoment: gamma > 0 required");
    return 1.0 / (2.0 * gamma * M_E);
}

TailFromMoments moment_to_tail(std::span<const double> c, double p, double q, double t) {
    if (t < 0.0) throw std::domain_error("moment_to_tail: t >= 0 required");
    int big_l = 0;
    int ell = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] > 0.0) {
            ++big_l;
            if (ell == 0) ell = static_cast<int>(k) + 1;
        } else if (c[k] < 0.0) {
            throw std::domain_error("moment_to_tail: coefficients must be nonnegative");
        }
    }
    if (big_l == 0) throw std::domain_error("moment_to_tail: all coefficients are zero");

    double eta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] <= 0.0) continue;
        eta = std::min(eta, std::pow(t, p / static_cast<double>(k + 1)) / c[k]);
    }
    const double scale = std::pow(big_l * M_E, p / static_cast<double>(ell));

    TailFromMoments out;
    out.trivial_regime = eta / scale < q;
    out.exponent = std::log(2.0) / (q * scale) * eta;
    out.bound = std::min(1.0, 2.0 * std::exp(-out.exponent));
    return out;
}

} // namespace conclab
