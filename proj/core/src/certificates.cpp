#include "conclab/certificates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "conclab/exact_moments.hpp"

namespace conclab {

namespace {

const std::vector<std::pair<TheoremId, std::string>>& id_table() {
    static const std::vector<std::pair<TheoremId, std::string>> table = {
        {TheoremId::sudakov_theta, "sudakov_theta"},
        {TheoremId::sudakov_theta_bounded, "sudakov_theta_bounded"},
        {TheoremId::sudakov_x_mean, "sudakov_x_mean"},
        {TheoremId::sudakov_x_pointwise, "sudakov_x_pointwise"},
        {TheoremId::local_law_rate, "local_law_rate"},
        {TheoremId::lipschitz_lsq, "lipschitz_lsq"},
        {TheoremId::cone_lipschitz, "cone_lipschitz"},
        {TheoremId::surface_lipschitz, "surface_lipschitz"},
        {TheoremId::higher_order_rn, "higher_order_rn"},
        {TheoremId::higher_order_cone, "higher_order_cone"},
        {TheoremId::higher_order_surface, "higher_order_surface"},
        {TheoremId::hanson_wright_lsq, "hanson_wright_lsq"},
        {TheoremId::symmetric_fn, "symmetric_fn"},
    };
    return table;
}

} // namespace

std::string theorem_id_name(TheoremId id) {
    for (const auto& [tid, name] : id_table())
        if (tid == id) return name;
    return "unknown";
}

TheoremId theorem_id_from_name(const std::string& name) {
    for (const auto& [tid, n] : id_table())
        if (n == name) return tid;
    throw std::invalid_argument("unknown theorem id: " + name);
}

nlohmann::json BoundCertificate::to_json(std::span<const double> t_grid) const {
    nlohmann::json j;
    j["theorem_id"] = theorem_id_name(id);
    j["params"] = params;
    j["constants"] = constants;
    nlohmann::json grid = nlohmann::json::array();
    for (double t : t_grid) grid.push_back({t, raw(t)});
    j["grid"] = grid;
    return j;
}

double hoelder_conjugate(double p) {
    if (!(p > 1.0)) throw std::domain_error("hoelder_conjugate: p > 1 required");
    return p / (p - 1.0);
}

double lsq_constant_pgauss(double q) {
    return std::pow(2.0, q) * std::pow(q, q - 1.0);
}

double lsq_constant_cone(double p, int n) {
    if (n < 3) throw std::domain_error("lsq_constant_cone: n >= 3 required");
    const double q = hoelder_conjugate(p);
    return 3.0 * std::pow(4.0, q) * std::pow(q, q - 1.0) * std::pow(static_cast<double>(n), -1.0 / (p - 1.0));
}

double lsq_constant_cone_exact(double p, int n) {
    const double q = hoelder_conjugate(p);
    return std::pow(4.0, q) * std::pow(q, q - 1.0) * exact_neg_moment_pgauss(p, n, q);
}

BoundCertificate cert_sudakov(int n, double v, SudakovVariant variant,
                              std::optional<double> k_or_r, std::optional<double> max_theta) {
    if (n < 3) throw std::domain_error("cert_sudakov: n >= 3 required");
    if (v == 0.0) throw std::domain_error("cert_sudakov: v must be nonzero");

    const double v4 = v * v * v * v;
    const double nn = static_cast<double>(n);

    BoundCertificate cert;
    cert.params = {{"n", nn}, {"v", v}};
    double coeff = 0.0;
    switch (variant) {
    case SudakovVariant::theta_plain:
        cert.id = TheoremId::sudakov_theta;
        coeff = v4 * nn * nn / 768.0;
        break;
    case SudakovVariant::theta_bounded: {
        cert.id = TheoremId::sudakov_theta_bounded;
        if (!k_or_r) throw std::invalid_argument("cert_sudakov: bounded variant needs K");
        const double k = *k_or_r;
        cert.params["K"] = k;
        coeff = v4 * nn * nn / (768.0 * k * k);
        break;
    }
    case SudakovVariant::x_mean: {
        cert.id = TheoremId::sudakov_x_mean;
        if (!k_or_r) throw std::invalid_argument("cert_sudakov: x_mean variant needs r");
        const double r = *k_or_r;
        cert.params["r"] = r;
        coeff = v4 * nn * nn / (4.0 * r * r);
        break;
    }
    case SudakovVariant::x_pointwise: {
        cert.id = TheoremId::sudakov_x_pointwise;
        if (!k_or_r) throw std::invalid_argument("cert_sudakov: x_pointwise variant needs r");
        const double r = *k_or_r;
        const double mt = max_theta.value_or(1.0); // trivial cap Theta_ij <= 1
        cert.params["r"] = r;
        cert.params["max_theta"] = mt;
        coeff = v4 * nn / (4.0 * r * r * mt * mt);
        break;
    }
    }
    cert.constants = {{"prefactor", 2.0}, {"exponent_coeff", coeff}};
    cert.raw = [coeff](double t) { return 2.0 * std::exp(-coeff * t * t); };
    return cert;
}

double cert_local_law_rate(int n, double v, double m3) {
    if (n < 4) throw std::domain_error("cert_local_law_rate: n >= 4 required");
    if (v == 0.0 || std::abs(v) > 1.0)
        throw std::domain_error("cert_local_law_rate: 0 < |v| <= 1 required");
    if (!(m3 > 0.0) || !std::isfinite(m3))
        throw std::domain_error("cert_local_law_rate: finite m3 > 0 required");
    const double nn = static_cast<double>(n);
    const double v4 = v * v * v * v;
    return m3 * std::log(nn) / (v4 * std::sqrt(nn));
}

BoundCertificate cert_lipschitz_lsq(double sigma, double q) {
    if (!(sigma > 0.0)) throw std::domain_error("cert_lipschitz_lsq: sigma > 0 required");
    if (!(q > 1.0 && q <= 2.0))
        throw std::domain_error("cert_lipschitz_lsq: q in (1, 2] required");
    const double p = q / (q - 1.0);
    const double coeff = std::pow((q - 1.0) / sigma, p);
    BoundCertificate cert;
    cert.id = TheoremId::lipschitz_lsq;
    cert.params = {{"sigma", sigma}, {"q", q}, {"p", p}};
    cert.constants = {{"prefactor", 2.0}, {"exponent_coeff", coeff}};
    cert.raw = [coeff, p](double t) { return 2.0 * std::exp(-coeff * std::pow(t, p)); };
    return cert;
}

BoundCertificate cert_cone_lipschitz(double p, int n) {
    if (p < 2.0) throw std::domain_error("cert_cone_lipschitz: p >= 2 required");
    if (n < 3) throw std::domain_error("cert_cone_lipschitz: n >= 3 required");
    const double q = hoelder_conjugate(p);
    const double coeff = std::pow(q - 1.0, p) / (std::pow(3.0, p - 1.0) * std::pow(4.0, p) * q) * n;
    BoundCertificate cert;
    cert.id = TheoremId::cone_lipschitz;
    cert.params = {{"p", p}, {"n", static_cast<double>(n)}, {"q", q}};
    cert.constants = {{"prefactor", 2.0}, {"exponent_coeff", coeff}};
    cert.raw = [coeff, p](double t) { return 2.0 * std::exp(-coeff * std::pow(t, p)); };
    return cert;
}

BoundCertificate cert_surface_lipschitz(double p, int n) {
    if (p < 2.0) throw std::domain_error("cert_surface_lipschitz: p >= 2 required");
    if (n < 3) throw std::domain_error("cert_surface_lipschitz: n >= 3 required");
    const double q = hoelder_conjugate(p);
    const double coeff = std::pow(q - 1.0, p) / (std::pow(3.0, p - 1.0) * std::pow(8.0, p) * q) * n;
    const double prefactor = 2.0 * std::pow(p + 1.0, 1.0 - 2.0 / p);
    BoundCertificate cert;
    cert.id = TheoremId::surface_lipschitz;
    cert.params = {{"p", p}, {"n", static_cast<double>(n)}, {"q", q}};
    cert.constants = {{"prefactor", prefactor}, {"exponent_coeff", coeff}};
    cert.raw = [coeff, p, prefactor](double t) { return prefactor * std::exp(-coeff * std::pow(t, p)); };
    return cert;
}

double higher_order_tail_constant(HigherOrderSetting setting, double p, int d) {
    if (p < 2.0) throw std::domain_error("higher_order_tail_constant: p >= 2 required");
    if (d < 1) throw std::invalid_argument("higher_order_tail_constant: d >= 1 required");
    const double dd = static_cast<double>(d);
    const double log_log2 = std::log(std::log(2.0));
    double lg;
    switch (setting) {
    case HigherOrderSetting::rn:
        lg = p * log_log2 - (p - 1.0) * std::log(4.0) - std::log(p) - (p - 1.0) * std::log(p - 1.0) -
             p * std::log(dd) - p;
        break;
    case HigherOrderSetting::cone:
    case HigherOrderSetting::surface:
        lg = p * log_log2 - (p - 1.0) * std::log(3.0) - (2.0 * p - 1.0) * std::log(4.0) -
             2.0 * std::log(p) - (p - 1.0) * std::log(p - 1.0) - p * std::log(dd) - p;
        break;
    default:
        throw std::invalid_argument("higher_order_tail_constant: unknown setting");
    }
    double c = std::exp(lg);
    if (setting == HigherOrderSetting::surface) c *= 0.5;
    return c;
}

double higher_order_expmoment_constant(HigherOrderSetting setting, double p, int d) {
    if (p < 2.0) throw std::domain_error("higher_order_expmoment_constant: p >= 2 required");
    if (d < 1) throw std::invalid_argument("higher_order_expmoment_constant: d >= 1 required");
    const double root = 1.0 / (p - 1.0);
    const double gap = std::pow(p, root) - std::pow(p - 1.0, root);
    const double log_num = (p - 1.0) * std::log(std::log(2.0) * gap);
    double lg;
    switch (setting) {
    case HigherOrderSetting::rn:
        lg = log_num - (2.0 * p - 1.0) * std::log(2.0) - 2.0 * std::log(p) -
             (p - 1.0) * std::log(p - 1.0) - 1.0;
        break;
    case HigherOrderSetting::cone:
    case HigherOrderSetting::surface:
        lg = log_num - (p - 1.0) * std::log(3.0) - (4.0 * p - 1.0) * std::log(2.0) -
             3.0 * std::log(p) - (p - 2.0) * std::log(p - 1.0) - 1.0;
        break;
    default:
        throw std::invalid_argument("higher_order_expmoment_constant: unknown setting");
    }
    double c = std::exp(lg);
    if (setting == HigherOrderSetting::surface) c *= 0.5;
    return c;
}

namespace {

double higher_order_prefactor(HigherOrderSetting setting, double p) {
    if (setting == HigherOrderSetting::surface)
        return std::sqrt(2.0) * std::pow(p + 1.0, 0.5 - 1.0 / p);
    return 2.0;
}

} // namespace

BoundCertificate cert_higher_order(HigherOrderSetting setting, double p, int d,
                                   double n_or_sigma, std::span<const double> norms) {
    if (d < 1) throw std::invalid_argument("cert_higher_order: d >= 1 required");
    if (static_cast<int>(norms.size()) != d)
        throw std::invalid_argument("cert_higher_order: need one norm per order 1..d");
    for (double nm : norms)
        if (!(nm > 0.0)) throw std::invalid_argument("cert_higher_order: norms must be positive");
    if (!(n_or_sigma > 0.0)) throw std::domain_error("cert_higher_order: n (or sigma) must be positive");

    const double c_pd = higher_order_tail_constant(setting, p, d);
    double scale;
    if (setting == HigherOrderSetting::rn) {
        scale = c_pd / std::pow(n_or_sigma, p);
    } else {
        scale = c_pd * n_or_sigma;
    }
    const double prefactor = higher_order_prefactor(setting, p);

    BoundCertificate cert;
    cert.id = setting == HigherOrderSetting::rn      ? TheoremId::higher_order_rn
              : setting == HigherOrderSetting::cone  ? TheoremId::higher_order_cone
                                                     : TheoremId::higher_order_surface;
    cert.params = {{"p", p}, {"d", static_cast<double>(d)}};
    cert.params[setting == HigherOrderSetting::rn ? "sigma" : "n"] = n_or_sigma;
    for (int k = 1; k <= d; ++k) cert.params["norm_" + std::to_string(k)] = norms[k - 1];
    cert.constants = {{"C_pd", c_pd}, {"prefactor", prefactor}, {"exponent_scale", scale}};
    if (setting != HigherOrderSetting::rn)
        cert.constants["sigma_q"] = lsq_constant_cone(p, static_cast<int>(n_or_sigma));

    std::vector<double> nk(norms.begin(), norms.end());
    cert.raw = [scale, prefactor, p, d, nk](double t) {
        double m = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= d; ++k)
            m = std::min(m, std::pow(t / nk[k - 1], p / static_cast<double>(k)));
        return prefactor * std::exp(-scale * m);
    };
    return cert;
}

ExpMomentCertificate cert_exp_moment_higher_order(HigherOrderSetting setting, double p, int d,
                                                  double n_or_sigma) {
    if (!(n_or_sigma > 0.0))
        throw std::domain_error("cert_exp_moment_higher_order: n (or sigma) must be positive");
    ExpMomentCertificate out;
    out.c_pd = higher_order_expmoment_constant(setting, p, d);
    out.scale = setting == HigherOrderSetting::rn ? out.c_pd / std::pow(n_or_sigma, p)
                                                  : out.c_pd * n_or_sigma;
    out.rhs = setting == HigherOrderSetting::surface
                  ? std::sqrt(2.0) * std::pow(p + 1.0, 0.5 - 1.0 / p)
                  : 2.0;
    return out;
}

BoundCertificate cert_hanson_wright(double p, double sigma, double a_hs_q, double a_op_q, double c_p) {
    if (!(a_hs_q > 0.0) || !(a_op_q > 0.0))
        throw std::domain_error("cert_hanson_wright: norms must be positive");
    if (!(sigma > 0.0)) throw std::domain_error("cert_hanson_wright: sigma > 0 required");
    const double s2 = sigma * sigma;
    BoundCertificate cert;
    cert.id = TheoremId::hanson_wright_lsq;
    cert.params = {{"p", p}, {"sigma", sigma}, {"A_hs_q", a_hs_q}, {"A_op_q", a_op_q}};
    cert.constants = {{"prefactor", 2.0}, {"c_p", c_p}};
    cert.raw = [p, s2, a_hs_q, a_op_q, c_p](double t) {
        const double hs_term = std::pow(t / (s2 * a_hs_q), p);
        const double op_term = std::pow(t / (s2 * a_op_q), p / 2.0);
        return 2.0 * std::exp(-c_p * std::min(hs_term, op_term));
    };
    return cert;
}

BoundCertificate cert_hanson_wright_derived(double p, double sigma, double a_hs_q, double a_op_q) {
    if (!(a_hs_q > 0.0) || !(a_op_q > 0.0))
        throw std::domain_error("cert_hanson_wright_derived: norms must be positive");
    const double q = hoelder_conjugate(p);
    const double c22 = higher_order_tail_constant(HigherOrderSetting::rn, p, 2);
    const double kappa = 2.0 * std::pow(4.0 / std::log(2.0), 1.0 / q);
    const double s2 = sigma * sigma;
    BoundCertificate cert;
    cert.id = TheoremId::hanson_wright_lsq;
    cert.params = {{"p", p}, {"sigma", sigma}, {"A_hs_q", a_hs_q}, {"A_op_q", a_op_q}};
    cert.constants = {{"prefactor", 2.0}, {"C_p2", c22}, {"gradient_factor", kappa}};
    cert.raw = [p, s2, a_hs_q, a_op_q, c22, kappa](double t) {
        const double hs_term = c22 * std::pow(t / (kappa * s2 * a_hs_q), p);
        const double op_term = c22 * std::pow(t / (2.0 * s2 * a_op_q), p / 2.0);
        return 2.0 * std::exp(-std::min(hs_term, op_term));
    };
    return cert;
}

namespace {

double symmetric_rate(double inv_bstar_coeff, double b_star, double inv_gb_coeff, double gamma_b) {
    const double first = b_star > 0.0 ? inv_bstar_coeff / b_star : std::numeric_limits<double>::infinity();
    return std::min(first, inv_gb_coeff / gamma_b);
}

} // namespace

BoundCertificate cert_symmetric_fn(double b, double b_star, double gamma, double c) {
    if (!(b > 0.0) || !(gamma > 0.0) || b_star < 0.0)
        throw std::domain_error("cert_symmetric_fn: B, gamma > 0 and B* >= 0 required");
    const double rate = c * symmetric_rate(1.0, b_star, 1.0, gamma * b);
    BoundCertificate cert;
    cert.id = TheoremId::symmetric_fn;
    cert.params = {{"B", b}, {"B_star", b_star}, {"gamma", gamma}};
    cert.constants = {{"prefactor", 2.0}, {"c", c}, {"rate", rate}};
    cert.raw = [rate](double t) { return 2.0 * std::exp(-rate * t); };
    return cert;
}

BoundCertificate cert_symmetric_fn_explicit(double b, double b_star, double gamma) {
    if (!(b > 0.0) || !(gamma > 0.0) || b_star < 0.0)
        throw std::domain_error("cert_symmetric_fn_explicit: B, gamma > 0 and B* >= 0 required");
    const double rate = symmetric_rate(2.0 / 3.0, b_star, 1.0 / 78.0, gamma * b);
    BoundCertificate cert;
    cert.id = TheoremId::symmetric_fn;
    cert.params = {{"B", b}, {"B_star", b_star}, {"gamma", gamma}};
    cert.constants = {{"prefactor", 5.0}, {"rate", rate}};
    cert.raw = [rate](double t) { return 5.0 * std::exp(-rate * t); };
    return cert;
}

} // namespace conclab
