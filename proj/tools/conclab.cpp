// conclab - batch front-end for the concentration laboratory.
//
// Subcommands: sample, moments, certificate, locallaw, tails, lsq-check,
// edgeworth, curvature, selftest. Exit codes: 0 success, 1 a certificate was
// empirically violated, 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "conclab/certificates.hpp"
#include "conclab/exact_moments.hpp"
#include "conclab/experiments.hpp"
#include "conclab/geometry.hpp"
#include "conclab/io.hpp"
#include "conclab/reduce.hpp"
#include "conclab/rng.hpp"
#include "conclab/sampling.hpp"
#include "conclab/spectral.hpp"
#include "conclab/weights.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct CommonOpts {
    std::string out;           // empty = stdout
    std::string format = "csv";
    int threads = -1;          // -1 = unset, fall back to CONCLAB_THREADS, else auto
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int resolve_threads(int opt) {
    if (opt >= 0) return opt;
    if (const char* env = std::getenv("CONCLAB_THREADS")) {
        try {
            return std::max(0, std::stoi(env));
        } catch (...) {
            return 0;
        }
    }
    return 0; // auto
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_seed) {
    cmd->add_option("--out", opts.out, "Output path (default: stdout)");
    cmd->add_option("--format", opts.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", opts.threads, "Worker threads (0 = auto; env CONCLAB_THREADS)");
    auto* seed = cmd->add_option("--seed", opts.seed, "Master seed for all random streams");
    seed->each([&opts](const std::string&) { opts.seed_set = true; });
    if (needs_seed) seed->required();
}

/// Writes payload to --out (or stdout). When writing to a file, a one-line
/// JSON summary goes to stdout so every artifact is traceable to its exact
/// seed and constants.
void emit(const CommonOpts& opts, const std::string& payload, const json& summary) {
    if (opts.out.empty()) {
        std::cout << payload;
        if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(opts.out, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + opts.out);
    f << payload;
    json s = summary;
    s["artifacts"] = {opts.out};
    std::cout << s.dump() << "\n";
}

std::vector<double> linspace(double lo, double hi, int points) {
    if (points < 2) return {lo};
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

json summary_for(const std::string& command, const json& params, const json& constants,
                 std::uint64_t seed, bool pass) {
    return json{{"command", command}, {"params", params}, {"constants_used", constants},
                {"seed", seed},       {"pass", pass},     {"artifacts", json::array()}};
}

// --- sample ------------------------------------------------------------------

struct SampleArgs {
    std::string kind = "cone";
    double p = 2.0;
    int n = 10;
    int count = 1;
};

int run_sample(const CommonOpts& opts, const SampleArgs& a) {
    conclab::CounterRng rng(conclab::RngState{opts.seed, 0});
    std::ostringstream csv;
    csv << "# command=sample kind=" << a.kind << " p=" << conclab::format_double(a.p)
        << " n=" << a.n << " count=" << a.count << " seed=" << conclab::format_u64(opts.seed)
        << "\n";

    json rows = json::array();
    if (a.kind == "haar") {
        csv << "sample,i,j,value\n";
        for (int s = 0; s < a.count; ++s) {
            const conclab::OrthogonalMatrix o = conclab::sample_haar_so(a.n, rng);
            for (int i = 0; i < a.n; ++i)
                for (int j = 0; j < a.n; ++j)
                    csv << s << "," << i << "," << j << ","
                        << conclab::format_double(o.entries(i, j)) << "\n";
            if (opts.format == "json") {
                json m = json::array();
                for (int i = 0; i < a.n; ++i)
                    for (int j = 0; j < a.n; ++j) m.push_back(o.entries(i, j));
                rows.push_back(m);
            }
        }
    } else if (a.kind == "pgauss") {
        csv << "sample,coord,value\n";
        for (int s = 0; s < a.count; ++s) {
            const Eigen::VectorXd z = conclab::sample_p_gaussian(a.p, a.n, rng);
            for (int i = 0; i < a.n; ++i)
                csv << s << "," << i << "," << conclab::format_double(z(i)) << "\n";
            if (opts.format == "json") rows.push_back(std::vector<double>(z.begin(), z.end()));
        }
    } else if (a.kind == "cone" || a.kind == "surface") {
        csv << "sample,coord,value,importance_weight\n";
        for (int s = 0; s < a.count; ++s) {
            conclab::SphereSample sample = conclab::sample_cone(a.p, a.n, rng);
            if (a.kind == "surface")
                sample.importance_weight = conclab::surface_density_factor(sample.theta, a.p);
            for (int i = 0; i < a.n; ++i)
                csv << s << "," << i << "," << conclab::format_double(sample.theta(i)) << ","
                    << conclab::format_double(sample.importance_weight) << "\n";
            if (opts.format == "json")
                rows.push_back({{"theta", std::vector<double>(sample.theta.begin(), sample.theta.end())},
                                {"importance_weight", sample.importance_weight}});
        }
    } else {
        throw std::invalid_argument("sample: unknown kind " + a.kind);
    }

    const json params = {{"kind", a.kind}, {"p", a.p}, {"n", a.n}, {"count", a.count}};
    if (opts.format == "json") {
        json j = summary_for("sample", params, json::object(), opts.seed, true);
        j["samples"] = rows;
        emit(opts, j.dump(2) + "\n", j);
    } else {
        emit(opts, csv.str(), summary_for("sample", params, json::object(), opts.seed, true));
    }
    return kExitOk;
}

// --- moments -------------------------------------------------------------------

struct MomentsArgs {
    double p = 2.0;
    int n = 5;
    double v = 2.0;
    bool negative = false;
};

int run_moments(const CommonOpts& opts, const MomentsArgs& a) {
    const double value = a.negative ? conclab::exact_neg_moment_pgauss(a.p, a.n, a.v)
                                    : conclab::exact_moment_cone(a.p, a.n, a.v);
    const json params = {{"p", a.p}, {"n", a.n}, {"v", a.v}, {"negative", a.negative}};
    if (opts.format == "json") {
        json j = summary_for("moments", params, json::object(), 0, true);
        j["value"] = value;
        if (!a.negative) j["upper_bound"] = conclab::cone_moment_upper_bound(a.p, a.n, a.v);
        else if (a.v <= a.p) j["upper_bound"] = conclab::neg_moment_upper_bound(a.p, a.n, a.v);
        emit(opts, j.dump(2) + "\n", j);
    } else {
        emit(opts, conclab::format_double(value) + "\n",
             summary_for("moments", params, json::object(), 0, true));
    }
    return kExitOk;
}

// --- certificate ---------------------------------------------------------------

struct CertificateArgs {
    std::string id = "cone_lipschitz";
    double p = 2.0;
    int n = 100;
    double v = 1.0;
    int d = 2;
    double sigma = 1.0;
    double q = 2.0;
    double k_bound = 1.0;
    double r_const = std::sqrt(2.0);
    double m3 = 1.0;
    double b = 1.0, b_star = 0.0, gamma = 1.0;
    double a_hs = 1.0, a_op = 1.0;
    std::vector<double> norms;
    double t = 0.0;
    double tmax = -1.0;
    int points = 50;
};

conclab::BoundCertificate build_certificate(const CertificateArgs& a) {
    using conclab::SudakovVariant;
    switch (conclab::theorem_id_from_name(a.id)) {
    case conclab::TheoremId::sudakov_theta:
        return conclab::cert_sudakov(a.n, a.v, SudakovVariant::theta_plain);
    case conclab::TheoremId::sudakov_theta_bounded:
        return conclab::cert_sudakov(a.n, a.v, SudakovVariant::theta_bounded, a.k_bound);
    case conclab::TheoremId::sudakov_x_mean:
        return conclab::cert_sudakov(a.n, a.v, SudakovVariant::x_mean, a.r_const);
    case conclab::TheoremId::sudakov_x_pointwise:
        return conclab::cert_sudakov(a.n, a.v, SudakovVariant::x_pointwise, a.r_const);
    case conclab::TheoremId::lipschitz_lsq:
        return conclab::cert_lipschitz_lsq(a.sigma, a.q);
    case conclab::TheoremId::cone_lipschitz:
        return conclab::cert_cone_lipschitz(a.p, a.n);
    case conclab::TheoremId::surface_lipschitz:
        return conclab::cert_surface_lipschitz(a.p, a.n);
    case conclab::TheoremId::higher_order_rn:
        return conclab::cert_higher_order(conclab::HigherOrderSetting::rn, a.p, a.d, a.sigma,
                                          a.norms);
    case conclab::TheoremId::higher_order_cone:
        return conclab::cert_higher_order(conclab::HigherOrderSetting::cone, a.p, a.d,
                                          static_cast<double>(a.n), a.norms);
    case conclab::TheoremId::higher_order_surface:
        return conclab::cert_higher_order(conclab::HigherOrderSetting::surface, a.p, a.d,
                                          static_cast<double>(a.n), a.norms);
    case conclab::TheoremId::hanson_wright_lsq:
        return conclab::cert_hanson_wright(a.p, a.sigma, a.a_hs, a.a_op);
    case conclab::TheoremId::symmetric_fn:
        return conclab::cert_symmetric_fn_explicit(a.b, a.b_star, a.gamma);
    case conclab::TheoremId::local_law_rate:
        throw std::invalid_argument("certificate: local_law_rate is a rate, use --id with --t only");
    }
    throw std::invalid_argument("certificate: unsupported id " + a.id);
}

int run_certificate(const CommonOpts& opts, const CertificateArgs& a) {
    if (a.id == "local_law_rate") {
        const double rate = conclab::cert_local_law_rate(a.n, a.v, a.m3);
        const json params = {{"n", a.n}, {"v", a.v}, {"m3", a.m3}};
        json j = summary_for("certificate", params, {{"c", 1.0}}, 0, true);
        j["kind"] = "rate";
        j["value"] = rate;
        if (opts.format == "json") emit(opts, j.dump(2) + "\n", j);
        else emit(opts, conclab::format_double(rate) + "\n", j);
        return kExitOk;
    }

    const conclab::BoundCertificate cert = build_certificate(a);
    const json params(cert.params);
    const json constants(cert.constants);

    if (a.tmax > 0.0) {
        const std::vector<double> grid = linspace(0.0, a.tmax, a.points);
        if (opts.format == "json") {
            json j = cert.to_json(grid);
            j["command"] = "certificate";
            j["pass"] = true;
            emit(opts, j.dump(2) + "\n", summary_for("certificate", params, constants, 0, true));
        } else {
            std::ostringstream csv;
            csv << "# command=certificate id=" << a.id << "\n#";
            for (const auto& [k, v] : cert.constants) csv << " " << k << "=" << conclab::format_double(v);
            csv << "\nt,bound,probability\n";
            for (double t : grid)
                csv << conclab::format_double(t) << "," << conclab::format_double(cert.bound(t))
                    << "," << conclab::format_double(cert.probability(t)) << "\n";
            emit(opts, csv.str(), summary_for("certificate", params, constants, 0, true));
        }
        return kExitOk;
    }

    const double value = cert.bound(a.t);
    if (opts.format == "json") {
        json j = summary_for("certificate", params, constants, 0, true);
        j["t"] = a.t;
        j["bound"] = value;
        j["probability"] = cert.probability(a.t);
        emit(opts, j.dump(2) + "\n", j);
    } else {
        emit(opts, conclab::format_double(value) + "\n",
             summary_for("certificate", params, constants, 0, true));
    }
    return kExitOk;
}

// --- locallaw -------------------------------------------------------------------

struct LocalLawArgs {
    std::string n_list = "50,100,200,400";
    double z_re = 0.2, z_im = 0.5;
    std::string dist = "gaussian";
    int replicas = 200;
};

conclab::EntryDistribution dist_from_name(const std::string& name) {
    if (name == "gaussian") return conclab::EntryDistribution::gaussian();
    if (name == "rademacher") return conclab::EntryDistribution::rademacher();
    if (name == "uniform") return conclab::EntryDistribution::uniform_centered();
    throw std::invalid_argument("unknown entry distribution: " + name);
}

int run_locallaw(const CommonOpts& opts, const LocalLawArgs& a) {
    const std::vector<int> ns = parse_int_list(a.n_list);
    const conclab::LocalLawResult res = conclab::run_local_law(
        ns, conclab::SpectralPoint(a.z_re, a.z_im), dist_from_name(a.dist), a.replicas,
        conclab::RngState{opts.seed, 0}, resolve_threads(opts.threads));
    const json summary = summary_for(
        "locallaw", {{"n_list", ns}, {"z_re", a.z_re}, {"z_im", a.z_im}, {"dist", a.dist},
                     {"replicas", a.replicas}},
        {{"slope", res.slope}}, opts.seed, res.deviations_decreasing);
    if (opts.format == "json") emit(opts, res.to_json().dump(2) + "\n", summary);
    else emit(opts, res.to_csv(), summary);
    return kExitOk;
}

// --- tails ----------------------------------------------------------------------

struct TailsArgs {
    std::string which = "lipschitz";
    int n = 50;
    double p = 2.0;
    int replicas = 10000;
    double tmax = -1.0;
    int points = 50;
    // sudakov
    std::string variant = "nested";
    double z_re = 0.0, z_im = 1.0;
    int inner = 100;
    int outer = 300;
    // lipschitz
    std::string measure = "cone";
    std::string function = "coordinate";
    // poly
    int m = 3;
    // hw
    std::string matrix = "offdiag";
    // symmetric
    std::string family = "x4";
};

conclab::LipschitzTestFunction lip_from_name(const std::string& name) {
    if (name == "coordinate") return conclab::lip_coordinate();
    if (name == "euclidean_norm") return conclab::lip_euclidean_norm();
    if (name == "constant") return conclab::lip_constant();
    throw std::invalid_argument("unknown lipschitz function: " + name);
}

conclab::SymmetricFunctionFamily family_from_name(const std::string& name) {
    if (name == "x4") return conclab::family_x4_rademacher();
    if (name == "cos") return conclab::family_cos_rademacher();
    if (name == "linear") return conclab::family_linear();
    throw std::invalid_argument("unknown symmetric family: " + name);
}

int run_tails(const CommonOpts& opts, const TailsArgs& a) {
    const int threads = resolve_threads(opts.threads);
    const conclab::RngState rng{opts.seed, 0};
    conclab::TailExperimentResult res;
    json extra = json::object();

    if (a.which == "sudakov") {
        const double tmax = a.tmax > 0.0 ? a.tmax : 0.2;
        const auto grid = linspace(0.0, tmax, a.points);
        const auto variant = a.variant == "pointwise" ? conclab::SudakovExperiment::x_pointwise
                                                      : conclab::SudakovExperiment::theta_nested;
        res = conclab::run_sudakov_tails(a.n, conclab::SpectralPoint(a.z_re, a.z_im),
                                         dist_from_name("gaussian"), a.outer, a.inner, grid, rng,
                                         variant, threads);
    } else if (a.which == "lipschitz") {
        const double tmax = a.tmax > 0.0 ? a.tmax : 1.0;
        const auto grid = linspace(0.0, tmax, a.points);
        const auto measure = a.measure == "surface" ? conclab::SphereMeasure::surface
                                                    : conclab::SphereMeasure::cone;
        res = conclab::run_lipschitz_tails(a.p, a.n, measure, lip_from_name(a.function),
                                           a.replicas, grid, rng, threads);
    } else if (a.which == "poly") {
        const double tmax = a.tmax > 0.0 ? a.tmax : 1.0;
        const auto grid = linspace(0.0, tmax, a.points);
        Eigen::VectorXd coeff = Eigen::VectorXd::Ones(a.n);
        const double norm = conclab::coefficient_norm(coeff, a.p);
        if (norm > 1.0) coeff /= norm;
        const auto poly = conclab::ElementaryPolynomial::checked(a.m, coeff, a.p);
        const conclab::PolynomialTailResult pres =
            conclab::run_polynomial_tails(a.p, a.n, poly, a.replicas, grid, rng, threads);
        res = pres.tails;
        extra = {{"exp_moment_mean", pres.exp_moment_mean},
                 {"exp_moment_stderr", pres.exp_moment_se},
                 {"exp_moment_pass", pres.exp_moment_pass},
                 {"c_used", pres.c_used},
                 {"exact_mean", pres.exact_mean}};
        if (!pres.exp_moment_pass) res.violation = true;
    } else if (a.which == "hw") {
        const double tmax = a.tmax > 0.0 ? a.tmax : 1.0;
        const auto grid = linspace(0.0, tmax, a.points);
        Eigen::MatrixXd mat;
        if (a.matrix == "identity") {
            mat = Eigen::MatrixXd::Identity(a.n, a.n);
        } else if (a.matrix == "offdiag") {
            mat = Eigen::MatrixXd::Zero(a.n, a.n);
            mat(0, 1) = mat(1, 0) = 1.0;
        } else {
            throw std::invalid_argument("tails hw: unknown matrix " + a.matrix);
        }
        const conclab::HansonWrightResult hres =
            conclab::run_hanson_wright(a.p, a.n, mat, a.replicas, grid, rng, 1.0, threads);
        res = hres.tails;
        extra = {{"exact_center", hres.exact_center},
                 {"empirical_mean", hres.empirical_mean},
                 {"center_ok", hres.center_ok}};
        if (!hres.center_ok) res.violation = true;
    } else if (a.which == "symmetric") {
        const double tmax = a.tmax > 0.0 ? a.tmax : 60.0;
        const auto grid = linspace(0.0, tmax, a.points);
        res = conclab::run_symmetric_tails(family_from_name(a.family), a.n, a.replicas, grid, rng,
                                           threads);
    } else {
        throw std::invalid_argument("tails: unknown experiment " + a.which);
    }

    json summary = summary_for("tails", {{"which", a.which}, {"n", a.n}, {"p", a.p}},
                               res.constants_used, opts.seed, !res.violation);
    summary["extra"] = extra;
    if (opts.format == "json") {
        json j = res.to_json();
        j["extra"] = extra;
        emit(opts, j.dump(2) + "\n", summary);
    } else {
        emit(opts, res.to_csv(), summary);
    }
    return res.violation ? kExitViolation : kExitOk;
}

// --- lsq-check --------------------------------------------------------------------

struct LsqArgs {
    double p = 2.0;
    int n = 20;
    std::string function = "all";
    int replicas = 10000;
};

int run_lsq(const CommonOpts& opts, const LsqArgs& a) {
    const int threads = resolve_threads(opts.threads);
    std::vector<conclab::LsqTestFunction> fns;
    for (auto& f : conclab::lsq_builtin_functions())
        if (a.function == "all" || a.function == f.name) fns.push_back(f);
    if (fns.empty()) throw std::invalid_argument("lsq-check: unknown function " + a.function);

    bool all_pass = true;
    std::ostringstream csv;
    csv << "# command=lsq-check p=" << conclab::format_double(a.p) << " n=" << a.n
        << " replicas=" << a.replicas << " seed=" << conclab::format_u64(opts.seed) << "\n";
    csv << "function,entropy,entropy_stderr,energy,energy_stderr,sigma_q,bound,pass\n";
    json results = json::array();
    for (std::size_t i = 0; i < fns.size(); ++i) {
        const conclab::LsqCheckResult r = conclab::run_lsq_empirical(
            a.p, a.n, fns[i], a.replicas, conclab::RngState{opts.seed, 1000 * i}, threads);
        all_pass = all_pass && r.pass;
        csv << r.function_name << "," << conclab::format_double(r.entropy) << ","
            << conclab::format_double(r.entropy_se) << "," << conclab::format_double(r.energy)
            << "," << conclab::format_double(r.energy_se) << ","
            << conclab::format_double(r.sigma_q) << "," << conclab::format_double(r.bound) << ","
            << (r.pass ? 1 : 0) << "\n";
        results.push_back(r.to_json());
    }

    const json summary = summary_for("lsq-check", {{"p", a.p}, {"n", a.n}, {"replicas", a.replicas}},
                                     json::object(), opts.seed, all_pass);
    if (opts.format == "json") {
        json j = summary;
        j["results"] = results;
        emit(opts, j.dump(2) + "\n", summary);
    } else {
        emit(opts, csv.str(), summary);
    }
    return all_pass ? kExitOk : kExitViolation;
}

// --- edgeworth ----------------------------------------------------------------------

struct EdgeworthArgs {
    std::string family = "x4";
    int n = 30;
    int replicas = 1000;
};

int run_edgeworth_cmd(const CommonOpts& opts, const EdgeworthArgs& a) {
    const conclab::EdgeworthResult r =
        conclab::run_edgeworth(family_from_name(a.family), a.n, a.replicas,
                               conclab::RngState{opts.seed, 0}, resolve_threads(opts.threads));
    const json summary = summary_for("edgeworth", {{"family", a.family}, {"n", a.n},
                                                   {"replicas", a.replicas}},
                                     {{"gamma_b", r.gamma_b}}, opts.seed, r.ratio_bounded);
    if (opts.format == "json") {
        emit(opts, r.to_json().dump(2) + "\n", summary);
    } else {
        std::ostringstream csv;
        csv << "# command=edgeworth family=" << a.family << " n=" << a.n
            << " replicas=" << a.replicas << " seed=" << conclab::format_u64(opts.seed) << "\n";
        csv << "residual_ratio_max,residual_ratio_mean,gamma_b,cubic_coeff,bounded\n";
        csv << conclab::format_double(r.residual_ratio_max) << ","
            << conclab::format_double(r.residual_ratio_mean) << ","
            << conclab::format_double(r.gamma_b) << "," << conclab::format_double(r.cubic_coeff)
            << "," << (r.ratio_bounded ? 1 : 0) << "\n";
        emit(opts, csv.str(), summary);
    }
    return r.ratio_bounded ? kExitOk : kExitViolation;
}

// --- curvature ----------------------------------------------------------------------

struct CurvatureArgs {
    double p = 4.0;
    int n = 4;
};

int run_curvature(const CommonOpts& opts, const CurvatureArgs& a) {
    std::ostringstream csv;
    json j;
    if (a.p > 2.0) {
        const conclab::RicciVanishingReport rep = conclab::ricci_vanishing_check(a.p, a.n);
        csv << "# command=curvature p=" << conclab::format_double(a.p) << " n=" << a.n << "\n";
        csv << "# fitted_exponent=" << conclab::format_double(rep.fitted_exponent)
            << " interior_curvature=" << conclab::format_double(rep.interior_curvature) << "\n";
        csv << "epsilon,sectional_curvature\n";
        for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
            csv << conclab::format_double(rep.epsilons[i]) << ","
                << conclab::format_double(rep.curvatures[i]) << "\n";
        j = {{"command", "curvature"},
             {"params", {{"p", a.p}, {"n", a.n}}},
             {"fitted_exponent", rep.fitted_exponent},
             {"interior_curvature", rep.interior_curvature},
             {"epsilons", rep.epsilons},
             {"curvatures", rep.curvatures},
             {"pass", true}};
    } else {
        Eigen::VectorXd sym(a.n);
        sym.setConstant(std::pow(static_cast<double>(a.n), -1.0 / a.p));
        const double k = conclab::sectional_curvature(sym, 0, 1, a.p);
        csv << "# command=curvature p=" << conclab::format_double(a.p) << " n=" << a.n << "\n";
        csv << "point,sectional_curvature\nsymmetric," << conclab::format_double(k) << "\n";
        j = {{"command", "curvature"}, {"params", {{"p", a.p}, {"n", a.n}}},
             {"symmetric_point_curvature", k}, {"pass", true}};
    }
    const json summary = summary_for("curvature", {{"p", a.p}, {"n", a.n}}, json::object(), 0, true);
    if (opts.format == "json") emit(opts, j.dump(2) + "\n", summary);
    else emit(opts, csv.str(), summary);
    return kExitOk;
}

// --- selftest -----------------------------------------------------------------------

struct SelfCheck {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

int run_selftest(const CommonOpts& opts) {
    using namespace conclab;
    const std::uint64_t seed = opts.seed_set ? opts.seed : 20250808ull;
    const int threads = resolve_threads(opts.threads);
    std::vector<SelfCheck> checks;
    auto below = [&](std::string name, double value, double threshold) {
        checks.push_back({std::move(name), value, threshold, value <= threshold});
    };

    // reproducibility: two engines on the same stream agree bit-for-bit
    {
        CounterRng a(RngState{seed, 7}), b(RngState{seed, 7});
        double diff = 0.0;
        for (int i = 0; i < 1000; ++i) diff += std::abs(a.next_gaussian() - b.next_gaussian());
        below("rng_bit_identical", diff, 0.0);
    }

    // moment oracle vs Monte Carlo, small grid
    for (double p : {2.0, 3.0}) {
        CounterRng rng(RngState{seed, static_cast<std::uint64_t>(p)});
        const int n = 5, reps = 20000;
        std::vector<double> m1(reps), m3(reps);
        for (int i = 0; i < reps; ++i) {
            const SphereSample s = sample_cone(p, n, rng);
            m1[i] = std::abs(s.theta(0));
            m3[i] = std::pow(std::abs(s.theta(0)), 3.0);
        }
        below("cone_moment_v1_p" + std::to_string(static_cast<int>(p)),
              std::abs(mean(m1) - exact_moment_cone(p, n, 1.0)), 3.0 * standard_error(m1));
        below("cone_moment_v3_p" + std::to_string(static_cast<int>(p)),
              std::abs(mean(m3) - exact_moment_cone(p, n, 3.0)), 3.0 * standard_error(m3));
    }

    // resolvent identities on a random 20x20
    {
        CounterRng rng(RngState{seed, 11});
        const Eigen::MatrixXd m =
            sample_entry_matrix(EntryDistribution::gaussian(), 20, rng) / std::sqrt(20.0);
        const SpectralPoint z(0.3, 0.7);
        const Resolvent r = resolvent(m, z);
        below("resolvent_entry_bound", r.entries.cwiseAbs().maxCoeff(), 1.0 / 0.7 + 1e-9);
        const Eigen::MatrixXcd r2 = r.entries * r.entries;
        std::complex<double> rowsum(0.0, 0.0);
        for (int jj = 0; jj < 20; ++jj) rowsum += r.entries(jj, 0) * r.entries(jj, 0);
        below("resolvent_rowsum_identity", std::abs(rowsum - r2(0, 0)), 1e-9);
        below("resolvent_derivative_check", resolvent_derivative_check(m, 0, 1, z, 1e-5), 1e-5);
    }

    // semicircle branch and root residual
    {
        double worst = 0.0, branch = 0.0;
        for (double re = -3.0; re <= 3.0; re += 0.5)
            for (double im : {0.05, 0.3, 1.0}) {
                const SpectralPoint z(re, im);
                const std::complex<double> s = semicircle_stieltjes(z);
                worst = std::max(worst, std::abs(s * s + z.z * s + 1.0));
                branch = std::min(branch, s.imag());
            }
        below("semicircle_residual", worst, 1e-12);
        below("semicircle_branch", -branch, 0.0);
        below("semicircle_at_i",
              std::abs(semicircle_stieltjes(SpectralPoint(0.0, 1.0)) -
                       std::complex<double>(0.0, (std::sqrt(5.0) - 1.0) / 2.0)),
              1e-12);
    }

    // weight structure on Haar draws
    {
        CounterRng rng(RngState{seed, 13});
        double worst_row = 0.0;
        for (int k = 0; k < 50; ++k) {
            const WeightMatrix w = build_theta(sample_haar_so(20, rng));
            worst_row = std::max(worst_row, w.hadamard_row_defect());
        }
        below("weights_hadamard_rows", worst_row, 1e-12);
        below("weights_tail_value",
              std::abs(max_weight_tail_certificate(100, std::sqrt(40.0)).simplified.value() -
                       8.0 / (std::sqrt(40.0) * std::sqrt(2.0 * M_PI)) * 1e-6),
              1e-18);
    }

    // certificate monotonicity
    {
        const BoundCertificate cert = cert_cone_lipschitz(2.0, 100);
        double worst = 0.0;
        double prev = cert.probability(0.0);
        for (int i = 1; i <= 100; ++i) {
            const double cur = cert.probability(0.01 * i);
            worst = std::max(worst, cur - prev);
            prev = cur;
        }
        below("certificate_monotone", worst, 0.0);
    }

    // a small lipschitz tail experiment must not violate its certificate
    {
        const auto grid = linspace(0.0, 1.0, 21);
        const TailExperimentResult r = run_lipschitz_tails(
            2.0, 20, SphereMeasure::cone, lip_coordinate(), 2000, grid, RngState{seed, 17}, threads);
        below("lipschitz_tail_violation", r.violation ? 1.0 : 0.0, 0.0);
    }

    // curvature: round sphere and vanishing direction
    {
        Eigen::VectorXd sym(4);
        sym.setConstant(std::pow(4.0, -0.25));
        below("curvature_symmetric_p4",
              std::abs(sectional_curvature(sym, 0, 1, 4.0) - 9.0 / 2.0), 1e-10);
        Eigen::VectorXd round(5);
        round.setConstant(std::pow(5.0, -0.5));
        below("curvature_round_sphere", std::abs(sectional_curvature(round, 0, 1, 2.0) - 1.0),
              1e-12);
    }

    bool all = true;
    std::ostringstream csv;
    csv << "# command=selftest seed=" << format_u64(seed) << "\n";
    csv << "check,value,threshold,pass\n";
    json results = json::array();
    for (const SelfCheck& c : checks) {
        all = all && c.pass;
        csv << c.name << "," << format_double(c.value) << "," << format_double(c.threshold) << ","
            << (c.pass ? 1 : 0) << "\n";
        results.push_back({{"check", c.name}, {"value", c.value}, {"threshold", c.threshold},
                           {"pass", c.pass}});
    }

    const json summary = summary_for("selftest", json::object(), json::object(), seed, all);
    if (opts.format == "json") {
        json j = summary;
        j["checks"] = results;
        emit(opts, j.dump(2) + "\n", summary);
    } else {
        emit(opts, csv.str(), summary);
    }
    return all ? kExitOk : kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conclab: concentration-of-measure numerical laboratory"};
    app.require_subcommand(1);

    CommonOpts common;

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "Draw cone/surface/haar/pgauss samples");
    sample->add_option("--kind", sample_args.kind, "cone|surface|haar|pgauss")
        ->check(CLI::IsMember({"cone", "surface", "haar", "pgauss"}));
    sample->add_option("--p", sample_args.p, "l_p exponent (p >= 2)");
    sample->add_option("--n", sample_args.n, "dimension");
    sample->add_option("--count", sample_args.count, "number of samples");
    add_common(sample, common, true);

    MomentsArgs moments_args;
    auto* moments = app.add_subcommand("moments", "Closed-form Gamma-ratio moments");
    moments->add_option("--p", moments_args.p, "l_p exponent");
    moments->add_option("--n", moments_args.n, "dimension");
    moments->add_option("--v", moments_args.v, "moment order");
    moments->add_flag("--neg", moments_args.negative, "negative moment of |Z|_p instead");
    add_common(moments, common, false);

    CertificateArgs cert_args;
    auto* cert = app.add_subcommand("certificate", "Evaluate a closed-form tail certificate");
    cert->add_option("--id", cert_args.id, "theorem id (e.g. cone_lipschitz)")->required();
    cert->add_option("--p", cert_args.p, "l_p exponent");
    cert->add_option("--n", cert_args.n, "dimension");
    cert->add_option("--v", cert_args.v, "Im(z)");
    cert->add_option("--d", cert_args.d, "derivative order");
    cert->add_option("--sigma", cert_args.sigma, "LS_q sigma");
    cert->add_option("--q", cert_args.q, "Hoelder conjugate");
    cert->add_option("--K", cert_args.k_bound, "a.s. entry bound");
    cert->add_option("--r", cert_args.r_const, "sub-Gaussian Lipschitz constant");
    cert->add_option("--m3", cert_args.m3, "third absolute moment");
    cert->add_option("--B", cert_args.b, "derivative bound B");
    cert->add_option("--Bstar", cert_args.b_star, "third-derivative bound B*");
    cert->add_option("--gamma", cert_args.gamma, "remainder constant gamma");
    cert->add_option("--A-hs", cert_args.a_hs, "||A||_HS(q)");
    cert->add_option("--A-op", cert_args.a_op, "||A||_op(q)");
    cert->add_option("--norms", cert_args.norms, "derivative norms for higher_order ids");
    cert->add_option("--t", cert_args.t, "threshold t");
    cert->add_option("--tmax", cert_args.tmax, "emit a grid on [0, tmax] instead");
    cert->add_option("--points", cert_args.points, "grid points");
    add_common(cert, common, false);

    LocalLawArgs ll_args;
    auto* locallaw = app.add_subcommand("locallaw", "Local semicircle law trend experiment");
    locallaw->add_option("--n-list", ll_args.n_list, "comma-separated matrix sizes");
    locallaw->add_option("--z-re", ll_args.z_re, "Re(z)");
    locallaw->add_option("--z-im", ll_args.z_im, "Im(z)");
    locallaw->add_option("--dist", ll_args.dist, "gaussian|rademacher|uniform");
    locallaw->add_option("--replicas", ll_args.replicas, "outer replicas per n");
    add_common(locallaw, common, true);

    TailsArgs tails_args;
    auto* tails = app.add_subcommand("tails", "Empirical tails vs certificates");
    tails->add_option("--which", tails_args.which, "sudakov|lipschitz|poly|hw|symmetric")
        ->check(CLI::IsMember({"sudakov", "lipschitz", "poly", "hw", "symmetric"}));
    tails->add_option("--n", tails_args.n, "dimension");
    tails->add_option("--p", tails_args.p, "l_p exponent");
    tails->add_option("--replicas", tails_args.replicas, "replicas");
    tails->add_option("--tmax", tails_args.tmax, "grid upper end");
    tails->add_option("--points", tails_args.points, "grid points");
    tails->add_option("--variant", tails_args.variant, "sudakov: nested|pointwise");
    tails->add_option("--z-re", tails_args.z_re, "Re(z)");
    tails->add_option("--z-im", tails_args.z_im, "Im(z)");
    tails->add_option("--inner", tails_args.inner, "inner replicas (nested sudakov)");
    tails->add_option("--outer", tails_args.outer, "outer replicas (sudakov)");
    tails->add_option("--measure", tails_args.measure, "cone|surface");
    tails->add_option("--f", tails_args.function, "coordinate|euclidean_norm|constant");
    tails->add_option("--m", tails_args.m, "polynomial order");
    tails->add_option("--matrix", tails_args.matrix, "identity|offdiag");
    tails->add_option("--family", tails_args.family, "x4|cos|linear");
    add_common(tails, common, true);

    LsqArgs lsq_args;
    auto* lsq = app.add_subcommand("lsq-check", "Empirical LS_q inequality check");
    lsq->add_option("--p", lsq_args.p, "l_p exponent");
    lsq->add_option("--n", lsq_args.n, "dimension");
    lsq->add_option("--f", lsq_args.function, "one|coordinate|one_plus_pair_product|all");
    lsq->add_option("--replicas", lsq_args.replicas, "replicas (>= 10^4)");
    add_common(lsq, common, true);

    EdgeworthArgs edge_args;
    auto* edge = app.add_subcommand("edgeworth", "Edgeworth residual-ratio check");
    edge->add_option("--family", edge_args.family, "x4|cos|linear");
    edge->add_option("--n", edge_args.n, "dimension");
    edge->add_option("--replicas", edge_args.replicas, "replicas");
    add_common(edge, common, true);

    CurvatureArgs curv_args;
    auto* curv = app.add_subcommand("curvature", "Sectional curvature report");
    curv->add_option("--p", curv_args.p, "l_p exponent");
    curv->add_option("--n", curv_args.n, "dimension");
    add_common(curv, common, false);

    auto* selftest = app.add_subcommand("selftest", "Run the cross-module invariant suite");
    add_common(selftest, common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*sample) return run_sample(common, sample_args);
        if (*moments) return run_moments(common, moments_args);
        if (*cert) return run_certificate(common, cert_args);
        if (*locallaw) return run_locallaw(common, ll_args);
        if (*tails) return run_tails(common, tails_args);
        if (*lsq) return run_lsq(common, lsq_args);
        if (*edge) return run_edgeworth_cmd(common, edge_args);
        if (*curv) return run_curvature(common, curv_args);
        if (*selftest) return run_selftest(common);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
