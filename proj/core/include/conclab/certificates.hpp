#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

namespace conclab {

enum class TheoremId {
    sudakov_theta,
    sudakov_theta_bounded,
    sudakov_x_mean,
    sudakov_x_pointwise,
    local_law_rate,
    lipschitz_lsq,
    cone_lipschitz,
    surface_lipschitz,
    higher_order_rn,
    higher_order_cone,
    higher_order_surface,
    hanson_wright_lsq,
    symmetric_fn,
};

std::string theorem_id_name(TheoremId id);
TheoremId theorem_id_from_name(const std::string& name);

/// A closed-form tail certificate: t -> bound(t), nonincreasing, with
/// bound(0) equal to the prefactor. probability(t) caps at 1; bound(t)
/// keeps the raw value for plots.
struct BoundCertificate {
    TheoremId id{};
    std::map<std::string, double> params;
    std::map<std::string, double> constants;
    std::function<double(double)> raw;

    double bound(double t) const { return raw(t); }
    double probability(double t) const { return std::min(1.0, raw(t)); }

    nlohmann::json to_json(std::span<const double> t_grid) const;
};

/// Hoelder conjugate q = p/(p-1).
double hoelder_conjugate(double p);

/// LS_q constant of the p-generalized Gaussian: sigma^q = 2^q q^{q-1}.
double lsq_constant_pgauss(double q);

/// LS_q constant of the cone measure on the l_p sphere,
/// sigma^q = 3 * 4^q q^{q-1} n^{-1/(p-1)} (valid for n >= 3), plus the
/// sharper Gamma-ratio version 4^q q^{q-1} Gamma((n-q)/p)/(p^{q/p} Gamma(n/p)).
double lsq_constant_cone(double p, int n);
double lsq_constant_cone_exact(double p, int n);

// --- Sudakov-type resolvent concentration -------------------------------

enum class SudakovVariant { theta_plain, theta_bounded, x_mean, x_pointwise };

/// Tail bounds for Stieltjes-transform concentration of weighted matrices:
///   theta_plain    2 exp(-|v|^4 n^2 t^2 / 768)
///   theta_bounded  2 exp(-|v|^4 n^2 t^2 / (768 K^2))        (needs K)
///   x_mean         2 exp(-|v|^4 n^2 t^2 / (4 r^2))          (needs r)
///   x_pointwise    2 exp(-|v|^4 n   t^2 / (4 r^2 maxTheta^2)) (needs r;
///                  maxTheta defaults to the trivial cap 1)
BoundCertificate cert_sudakov(int n, double v, SudakovVariant variant,
                              std::optional<double> k_or_r = std::nullopt,
                              std::optional<double> max_theta = std::nullopt);

/// Local-law rate m3 * log(n) / (|v|^4 sqrt(n)) with the absolute constant
/// treated as 1. A rate for trend fitting, never an absolute bound.
/// Requires n >= 4 and 0 < |v| <= 1.
double cert_local_law_rate(int n, double v, double m3);

// --- First-order (Lipschitz) bounds --------------------------------------

/// 2 exp(-((q-1)/sigma)^p t^p) for Gamma(f) <= 1 under LS_q(sigma^q).
BoundCertificate cert_lipschitz_lsq(double sigma, double q);

/// Cone measure: 2 exp(-((q-1)^p / (3^{p-1} 4^p q)) n t^p).
BoundCertificate cert_cone_lipschitz(double p, int n);

/// Surface measure: 2 (p+1)^{1-2/p} exp(-((q-1)^p / (3^{p-1} 8^p q)) n t^p).
BoundCertificate cert_surface_lipschitz(double p, int n);

// --- Higher order concentration -------------------------------------------

enum class HigherOrderSetting { rn, cone, surface };

/// Tail-bound constant C_{p,d}:
///   rn       log(2)^p / (4^{p-1} p (p-1)^{p-1} d^p e^p)
///   cone     log(2)^p / (3^{p-1} 4^{2p-1} p^2 (p-1)^{p-1} d^p e^p)
///   surface  half the cone value
/// evaluated in log space.
double higher_order_tail_constant(HigherOrderSetting setting, double p, int d);

/// Exponential-moment constant c_{p,d}:
///   rn       (log(2)(p^{1/(p-1)} - (p-1)^{1/(p-1)}))^{p-1} / (2^{2p-1} p^2 (p-1)^{p-1} e)
///   cone     same numerator / (3^{p-1} 2^{4p-1} p^3 (p-1)^{p-2} e)
///   surface  half the cone value
double higher_order_expmoment_constant(HigherOrderSetting setting, double p, int d);

/// Tail bound for a C^d function with derivative norms
/// norms[k-1] = ||f^{(k)}||_{op(q),q} (k < d) and norms[d-1] = ||f^{(d)}||_{op(q),inf}:
///   prefactor * exp(-scale * min(min_{k<d} (t/norms[k-1])^{p/k}, (t/norms[d-1])^{p/d}))
/// with scale = C_{p,d}/sigma^p (rn) or C_{p,d} * n (cone/surface) and
/// prefactor 2 (rn/cone) or sqrt(2)(p+1)^{1/2-1/p} (surface).
/// n_or_sigma is sigma in the rn setting and n otherwise.
BoundCertificate cert_higher_order(HigherOrderSetting setting, double p, int d,
                                   double n_or_sigma, std::span<const double> norms);

/// The exponential-moment side: integral exp(scale |f|^{p/d}) dmu <= rhs.
struct ExpMomentCertificate {
    double c_pd = 0.0;
    double scale = 0.0; // c/sigma^p (rn) or c*n (cone/surface)
    double rhs = 2.0;
};

ExpMomentCertificate cert_exp_moment_higher_order(HigherOrderSetting setting, double p, int d,
                                                  double n_or_sigma);

// --- Hanson-Wright under LS_q ---------------------------------------------

/// 2 exp(-c_p min((t/(sigma^2 ||A||_{HS(q)}))^p, (t/(sigma^2 ||A||_{op(q)}))^{p/2})).
/// The paper's c_p is existence-only; it is a configuration parameter with
/// default 1.
BoundCertificate cert_hanson_wright(double p, double sigma, double a_hs_q, double a_op_q,
                                    double c_p = 1.0);

/// Fully explicit conservative variant assembled from the order-2 tail
/// theorem and the SG_q gradient bound ||f^{(1)}|| <= 2 (4/log 2)^{1/q} sigma ||A||_{HS(q)}.
BoundCertificate cert_hanson_wright_derived(double p, double sigma, double a_hs_q, double a_op_q);

// --- Symmetric-function families -------------------------------------------

/// 2 exp(-c min(1/B*, 1/(gamma B)) t); c is existence-only, default 1.
/// B* = 0 is allowed and removes the first term from the min.
BoundCertificate cert_symmetric_fn(double b, double b_star, double gamma, double c = 1.0);

/// The fully explicit alternative: 5 exp(-min(2/(3 B*), 1/(78 gamma B)) t).
BoundCertificate cert_symmetric_fn_explicit(double b, double b_star, double gamma);

} // namespace conclab
