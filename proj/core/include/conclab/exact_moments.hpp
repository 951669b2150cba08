#pragma once

#include <span>

namespace conclab {

/// Absolute moment of a coordinate under the cone measure on the l_p sphere:
///   E |theta_1|^v = Gamma((1+v)/p) / Gamma(1/p) * Gamma(n/p) / Gamma((v+n)/p).
/// Evaluated in log-Gamma space (n/p can exceed the direct-Gamma overflow
/// point). Odd signed moments vanish by symmetry.
double exact_moment_cone(double p, int n, double v);

/// The piecewise upper bound on exact_moment_cone:
///   n^{-1} (n+v)^{1-v/p}               for 0 <= v <= p,
///   (p+1)^{v/p-1} n^{-v/p}             for p <= v <= 2p,
///   (1+v)^{v/p-1} n^{-1} (n+p)^{1-v/p} for v >= 2p.
double cone_moment_upper_bound(double p, int n, double v);

/// Negative moment of the l_p norm of a p-generalized Gaussian vector:
///   E |Z|_p^{-v} = Gamma((n-v)/p) / (p^{v/p} Gamma(n/p)),  n > v.
double exact_neg_moment_pgauss(double p, int n, double v);

/// Bound (n-v)^{-1} n^{1-v/p}, valid for v <= p.
double neg_moment_upper_bound(double p, int n, double v);

/// L2 bound on the surface/cone density: (p+1)^{1/2 - 1/p}.
double density_l2_bound(double p);

/// Given ||g||_k <= gamma*k for all integer k >= 1, returns the constant
/// c = 1/(2 gamma e) with  integral exp(c|g|) dmu <= 2.
double moment_to_expmoment(double gamma);

/// Tail bound from zoomed moment growth: if ||g||_r <= sum_k (C_k r)^{k/p}
/// for r >= q, then
///   mu(|g| >= t) <= 2 exp(-(log 2) / (q (L e)^{p/l}) * min_k t^{p/k} / C_k),
/// with L = #{k : C_k > 0} and l the smallest such k. The bound is capped at
/// 1 and trivial_regime marks t below the proof's nontrivial-regime cutoff
/// ((Le)^{-p/l} min_k t^{p/k}/C_k < q), where only the cap is meaningful.
struct TailFromMoments {
    double bound = 1.0;
    double exponent = 0.0; // (log 2)/(q (Le)^{p/l}) * min_k t^{p/k}/C_k
    bool trivial_regime = false;
};

TailFromMoments moment_to_tail(std::span<const double> c, double p, double q, double t);

} // namespace conclab
