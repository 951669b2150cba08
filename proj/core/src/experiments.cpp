#include "conclab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "conclab/exact_moments.hpp"
#include "conclab/io.hpp"
#include "conclab/reduce.hpp"

namespace conclab {

namespace {

std::complex<double> stieltjes_eigenvalues_only(const Eigen::MatrixXd& m, const SpectralPoint& z) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::complex<double> s(0.0, 0.0);
    for (int k = 0; k < ev.size(); ++k) s += 1.0 / (std::complex<double>(ev(k), 0.0) - z.z);
    return s / static_cast<double>(ev.size());
}

std::complex<double> complex_mean(std::span<const double> re, std::span<const double> im) {
    return {mean(re), mean(im)};
}

Eigen::MatrixXd hadamard(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.cwiseProduct(b);
}

struct TailInputs {
    std::string name;
    std::span<const double> t_grid;
    std::span<const double> stats;
    std::span<const double> weights; // empty = unweighted
    const BoundCertificate* cert = nullptr;
    int n = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    double inner_noise = 0.0;
};

TailExperimentResult make_tail_result(const TailInputs& in) {
    TailExperimentResult out;
    out.experiment = in.name;
    out.t_grid.assign(in.t_grid.begin(), in.t_grid.end());
    out.n = in.n;
    out.p = in.p;
    out.replicas = static_cast<int>(in.stats.size());
    out.seed = in.seed;
    out.inner_noise = in.inner_noise;
    out.constants_used = in.cert->constants;

    const std::size_t r = in.stats.size();
    const bool weighted = !in.weights.empty();
    double total_w = weighted ? pairwise_sum(in.weights) : static_cast<double>(r);

    for (double t : in.t_grid) {
        std::vector<double> hits(r);
        for (std::size_t i = 0; i < r; ++i)
            hits[i] = (in.stats[i] >= t) ? (weighted ? in.weights[i] : 1.0) : 0.0;
        const double tail = pairwise_sum(hits) / total_w;

        double se;
        if (weighted) {
            std::vector<double> dev(r);
            for (std::size_t i = 0; i < r; ++i) {
                const double x = (in.stats[i] >= t) ? 1.0 : 0.0;
                dev[i] = in.weights[i] * (x - tail) * in.weights[i] * (x - tail);
            }
            se = std::sqrt(pairwise_sum(dev)) / total_w;
        } else {
            se = std::sqrt(std::max(0.0, tail * (1.0 - tail)) / static_cast<double>(r));
        }
        out.empirical_tail.push_back(tail);
        out.empirical_stderr.push_back(se);
        out.certificate.push_back(in.cert->probability(t));
        out.certificate_raw.push_back(in.cert->bound(t));
    }

    out.empirical_tail = isotonic_nonincreasing(out.empirical_tail);
    out.violation = false;
    for (std::size_t k = 0; k < out.t_grid.size(); ++k)
        if (out.empirical_tail[k] - 3.0 * out.empirical_stderr[k] > out.certificate[k])
            out.violation = true;
    return out;
}

} // namespace

std::vector<double> isotonic_nonincreasing(std::span<const double> y) {
    // PAVA on the negated sequence gives the nondecreasing fit
    std::vector<double> level;
    std::vector<double> weight;
    for (double v : y) {
        level.push_back(-v);
        weight.push_back(1.0);
        while (level.size() >= 2 && level[level.size() - 2] > level.back()) {
            const double w = weight.back() + weight[weight.size() - 2];
            const double merged =
                (level.back() * weight.back() + level[level.size() - 2] * weight[weight.size() - 2]) / w;
            level.pop_back();
            weight.pop_back();
            level.back() = merged;
            weight.back() = w;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (std::size_t b = 0; b < level.size(); ++b)
        for (int k = 0; k < static_cast<int>(weight[b]); ++k) out.push_back(-level[b]);
    return out;
}

// --- serialization -----------------------------------------------------------

std::string TailExperimentResult::to_csv() const {
    std::ostringstream os;
    os << "# experiment=" << experiment << "\n";
    os << "# n=" << n << " p=" << format_double(p) << " replicas=" << replicas
       << " seed=" << format_u64(seed) << "\n";
    os << "# violation=" << (violation ? 1 : 0)
       << " inner_noise=" << format_double(inner_noise) << "\n";
    os << "#";
    for (const auto& [k, v] : constants_used) os << " " << k << "=" << format_double(v);
    os << "\n";
    os << "t,empirical_tail,empirical_stderr,certificate,certificate_raw\n";
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        os << format_double(t_grid[i]) << "," << format_double(empirical_tail[i]) << ","
           << format_double(empirical_stderr[i]) << "," << format_double(certificate[i]) << ","
           << format_double(certificate_raw[i]) << "\n";
    }
    return os.str();
}

nlohmann::json TailExperimentResult::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["params"] = {{"n", n}, {"p", p}, {"replicas", replicas}};
    j["seed"] = seed;
    j["pass_flags"] = {{"no_violation", !violation}};
    j["constants_used"] = constants_used;
    j["inner_noise"] = inner_noise;
    nlohmann::json grid = nlohmann::json::array();
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        grid.push_back({{"t", t_grid[i]},
                        {"tail", empirical_tail[i]},
                        {"stderr", empirical_stderr[i]},
                        {"certificate", certificate[i]},
                        {"certificate_raw", certificate_raw[i]}});
    j["grid"] = grid;
    return j;
}

std::string LocalLawResult::to_csv() const {
    std::ostringstream os;
    os << "# experiment=local_law\n";
    os << "# z_re=" << format_double(z.real()) << " z_im=" << format_double(z.imag())
       << " replicas=" << replicas << " seed=" << format_u64(seed) << "\n";
    os << "# s_re=" << format_double(semicircle_value.real())
       << " s_im=" << format_double(semicircle_value.imag())
       << " slope=" << format_double(slope)
       << " decreasing=" << (deviations_decreasing ? 1 : 0)
       << " outside_hypothesis=" << (outside_hypothesis ? 1 : 0) << "\n";
    os << "n,mean_re,mean_im,stderr,deviation,rate\n";
    for (const LocalLawPoint& pt : points) {
        os << pt.n << "," << format_double(pt.mean_s.real()) << ","
           << format_double(pt.mean_s.imag()) << "," << format_double(pt.std_error) << ","
           << format_double(pt.deviation) << "," << format_double(pt.rate) << "\n";
    }
    return os.str();
}

nlohmann::json LocalLawResult::to_json() const {
    nlohmann::json j;
    j["experiment"] = "local_law";
    j["params"] = {{"z_re", z.real()}, {"z_im", z.imag()}, {"replicas", replicas}};
    j["seed"] = seed;
    j["pass_flags"] = {{"deviations_decreasing", deviations_decreasing},
                       {"within_hypothesis", !outside_hypothesis}};
    j["slope"] = slope;
    j["semicircle"] = {semicircle_value.real(), semicircle_value.imag()};
    nlohmann::json pts = nlohmann::json::array();
    for (const LocalLawPoint& pt : points)
        pts.push_back({{"n", pt.n},
                       {"mean_re", pt.mean_s.real()},
                       {"mean_im", pt.mean_s.imag()},
                       {"stderr", pt.std_error},
                       {"deviation", pt.deviation},
                       {"rate", pt.rate}});
    j["points"] = pts;
    return j;
}

nlohmann::json LsqCheckResult::to_json() const {
    nlohmann::json j;
    j["experiment"] = "lsq_check";
    j["params"] = {{"function", function_name}, {"p", p}, {"q", q}, {"n", n}, {"replicas", replicas}};
    j["seed"] = seed;
    j["entropy"] = entropy;
    j["entropy_stderr"] = entropy_se;
    j["energy"] = energy;
    j["energy_stderr"] = energy_se;
    j["constants_used"] = {{"sigma_q", sigma_q}};
    j["bound"] = bound;
    j["pass_flags"] = {{"pass", pass}};
    return j;
}

nlohmann::json EdgeworthResult::to_json() const {
    nlohmann::json j;
    j["experiment"] = "edgeworth";
    j["params"] = {{"family", family}, {"n", n}, {"replicas", replicas}};
    j["seed"] = seed;
    j["residual_ratio_max"] = residual_ratio_max;
    j["residual_ratio_mean"] = residual_ratio_mean;
    j["constants_used"] = {{"gamma_b", gamma_b}, {"cubic_coeff", cubic_coeff}};
    j["pass_flags"] = {{"ratio_bounded", ratio_bounded}};
    return j;
}

// --- catalogs ----------------------------------------------------------------

LipschitzTestFunction lip_coordinate() {
    return {"coordinate",
            {[](const Eigen::VectorXd& x) { return x(0); },
             [](const Eigen::VectorXd& x) {
                 Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
                 g(0) = 1.0;
                 return g;
             }},
            [](double, int) { return 1.0; }};
}

LipschitzTestFunction lip_euclidean_norm() {
    return {"euclidean_norm",
            {[](const Eigen::VectorXd& x) { return x.norm(); },
             [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x / x.norm()); }},
            // sup |grad|_q = sup |x|_q / |x|_2 = n^{1/q - 1/2}
            [](double p, int n) {
                const double q = hoelder_conjugate(p);
                return std::pow(static_cast<double>(n), 1.0 / q - 0.5);
            }};
}

LipschitzTestFunction lip_constant() {
    return {"constant",
            {[](const Eigen::VectorXd&) { return 1.0; },
             [](const Eigen::VectorXd& x) { return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size())); }},
            [](double, int) { return 1.0; }};
}

std::vector<LsqTestFunction> lsq_builtin_functions() {
    std::vector<LsqTestFunction> fns;
    fns.push_back({"one",
                   {[](const Eigen::VectorXd&) { return 1.0; },
                    [](const Eigen::VectorXd& x) {
                        return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size()));
                    }}});
    fns.push_back({"coordinate",
                   {[](const Eigen::VectorXd& x) { return x(0); },
                    [](const Eigen::VectorXd& x) {
                        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
                        g(0) = 1.0;
                        return g;
                    }}});
    fns.push_back({"one_plus_pair_product",
                   {[](const Eigen::VectorXd& x) { return 1.0 + x(0) * x(1); },
                    [](const Eigen::VectorXd& x) {
                        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
                        g(0) = x(1);
                        g(1) = x(0);
                        return g;
                    }}});
    return fns;
}

double coefficient_norm(const Eigen::VectorXd& a, double p) {
    if (p == 2.0) return a.cwiseAbs().maxCoeff();
    return lp_norm(a, p / (p - 2.0));
}

ElementaryPolynomial ElementaryPolynomial::checked(int m, Eigen::VectorXd a, double p) {
    if (m < 3) throw std::domain_error("ElementaryPolynomial: m >= 3 required");
    if (coefficient_norm(a, p) > 1.0 + 1e-12)
        throw std::domain_error("ElementaryPolynomial: coefficient norm |a|_{p/(p-2)} must be <= 1");
    return {m, std::move(a)};
}

double ElementaryPolynomial::operator()(const Eigen::VectorXd& theta) const {
    double s = 0.0;
    for (int j = 0; j < theta.size(); ++j) s += a(j) * std::pow(theta(j), m);
    return s;
}

SymmetricFunctionFamily family_x4_rademacher() {
    SymmetricFunctionFamily fam;
    fam.name = "x4_rademacher";
    fam.h = [](const Eigen::VectorXd& th) {
        const double s2 = th.squaredNorm();
        double s4 = 0.0;
        for (int j = 0; j < th.size(); ++j) s4 += th(j) * th(j) * th(j) * th(j);
        return 3.0 * s2 * s2 - 2.0 * s4;
    };
    fam.h_inf = 3.0;
    fam.cubic_coeff = 0.0;
    fam.deriv_bound = 24.0; // sup of the admissible mixed partials on the unit ball
    fam.gamma = 1.0 / 12.0; // R_4 = -2 sum theta^4 exactly, so gamma B = 2 is tight
    return fam;
}

SymmetricFunctionFamily family_cos_rademacher() {
    SymmetricFunctionFamily fam;
    fam.name = "cos_rademacher";
    fam.h = [](const Eigen::VectorXd& th) {
        double prod = 1.0;
        for (int j = 0; j < th.size(); ++j) prod *= std::cos(th(j));
        return prod;
    };
    fam.h_inf = std::exp(-0.5);
    fam.cubic_coeff = 0.0;
    fam.deriv_bound = 1.0;
    fam.gamma = 0.1; // empirical ratio is ~ e^{-1/2}/12 ~ 0.05
    return fam;
}

SymmetricFunctionFamily family_linear() {
    SymmetricFunctionFamily fam;
    fam.name = "linear";
    fam.h = [](const Eigen::VectorXd&) { return 0.0; };
    fam.h_inf = 0.0;
    fam.cubic_coeff = 0.0;
    fam.deriv_bound = 1.0;
    fam.gamma = 1.0;
    return fam;
}

double family_property_defect(const SymmetricFunctionFamily& fam, int n, RngState rng, int trials) {
    CounterRng engine(rng);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::VectorXd th(n);
        for (int j = 0; j < n; ++j) th(j) = engine.next_gaussian();
        th /= th.norm();
        const double base = fam.h(th);

        // coordinate-insertion consistency
        const int pos = static_cast<int>(engine.next_u64() % static_cast<std::uint64_t>(n + 1));
        Eigen::VectorXd inserted(n + 1);
        for (int j = 0, k = 0; j < n + 1; ++j) inserted(j) = (j == pos) ? 0.0 : th(k++);
        worst = std::max(worst, std::abs(fam.h(inserted) - base));

        // vanishing first partial at theta_j = 0
        const int jdx = static_cast<int>(engine.next_u64() % static_cast<std::uint64_t>(n));
        Eigen::VectorXd at_zero = th;
        at_zero(jdx) = 0.0;
        const double eps = 1e-6;
        Eigen::VectorXd up = at_zero, dn = at_zero;
        up(jdx) = eps;
        dn(jdx) = -eps;
        worst = std::max(worst, std::abs(fam.h(up) - fam.h(dn)) / (2.0 * eps));

        // permutation symmetry (Fisher-Yates on a copy)
        Eigen::VectorXd perm = th;
        for (int j = n - 1; j > 0; --j) {
            const int k = static_cast<int>(engine.next_u64() % static_cast<std::uint64_t>(j + 1));
            std::swap(perm(j), perm(k));
        }
        worst = std::max(worst, std::abs(fam.h(perm) - base));
    }
    return worst;
}

double matrix_hs_q_norm(const Eigen::MatrixXd& a, double q) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) s += std::pow(std::abs(a(i, j)), q);
    return std::pow(s, 1.0 / q);
}

double matrix_op_q_norm(const Eigen::MatrixXd& a, double p) {
    const int n = static_cast<int>(a.rows());
    bool diagonal = true;
    int nonzero = 0;
    int pi = -1, pj = -1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (a(i, j) != 0.0) {
                ++nonzero;
                if (i != j) {
                    diagonal = false;
                    pi = std::min(i, j);
                    pj = std::max(i, j);
                }
            }
        }
    if (diagonal) return coefficient_norm(a.diagonal(), p);
    if (nonzero == 2 && pi >= 0 && a(pi, pj) == a(pj, pi)) {
        bool pure_pair = true;
        for (int i = 0; i < n && pure_pair; ++i)
            for (int j = 0; j < n; ++j)
                if (a(i, j) != 0.0 && !((i == pi && j == pj) || (i == pj && j == pi))) pure_pair = false;
        if (pure_pair) return std::abs(a(pi, pj)) * std::pow(2.0, 1.0 - 2.0 / p);
    }
    return matrix_hs_q_norm(a, hoelder_conjugate(p)); // valid upper bound
}

// --- experiments ---------------------------------------------------------------

LocalLawResult run_local_law(std::span<const int> n_list, SpectralPoint z,
                             const EntryDistribution& dist, int outer_replicas, RngState rng,
                             int threads) {
    if (outer_replicas < 100)
        throw std::domain_error("run_local_law: outer_replicas >= 100 required");
    for (int n : n_list)
        if (n < 4) throw std::domain_error("run_local_law: each n >= 4 required");

    LocalLawResult out;
    out.z = z.z;
    out.replicas = outer_replicas;
    out.seed = rng.master_seed;
    out.semicircle_value = semicircle_stieltjes(z);
    out.outside_hypothesis = std::abs(z.v()) > 1.0;

    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const int n = n_list[ni];
        std::vector<double> re(outer_replicas), im(outer_replicas);
        const RngState base = rng.sub(ni);
        parallel_for(threads, static_cast<std::size_t>(outer_replicas), [&](std::size_t rix) {
            CounterRng stream(base.sub(rix));
            const OrthogonalMatrix o = sample_haar_so(n, stream);
            const Eigen::MatrixXd x = sample_entry_matrix(dist, n, stream);
            const Eigen::MatrixXd theta = [&] {
                Eigen::MatrixXd th(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        th(i, j) = std::sqrt(0.5 * (o.entries(i, j) * o.entries(i, j) +
                                                    o.entries(j, i) * o.entries(j, i)));
                return th;
            }();
            const std::complex<double> s = stieltjes_eigenvalues_only(hadamard(theta, x), z);
            re[rix] = s.real();
            im[rix] = s.imag();
        });
        LocalLawPoint pt;
        pt.n = n;
        pt.mean_s = complex_mean(re, im);
        pt.std_error = std::sqrt((sample_variance(re) + sample_variance(im)) /
                                 static_cast<double>(outer_replicas));
        pt.deviation = std::abs(pt.mean_s - out.semicircle_value);
        pt.rate = std::abs(z.v()) <= 1.0 ? cert_local_law_rate(n, z.v(), dist.m3) : 0.0;
        out.points.push_back(pt);
    }

    std::vector<double> logn, logd;
    out.deviations_decreasing = true;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        logn.push_back(std::log(static_cast<double>(out.points[i].n)));
        logd.push_back(std::log(out.points[i].deviation));
        if (i > 0 && !(out.points[i].deviation < out.points[i - 1].deviation))
            out.deviations_decreasing = false;
    }
    out.slope = out.points.size() >= 2 ? fit_slope(logn, logd) : 0.0;
    return out;
}

TailExperimentResult run_sudakov_tails(int n, SpectralPoint z, const EntryDistribution& dist,
                                       int outer, int inner, std::span<const double> t_grid,
                                       RngState rng, SudakovExperiment variant, int threads) {
    if (n < 3) throw std::domain_error("run_sudakov_tails: n >= 3 required");

    if (variant == SudakovExperiment::theta_nested) {
        if (inner < 50) throw std::domain_error("run_sudakov_tails: inner >= 50 required");
        if (outer < 200) throw std::domain_error("run_sudakov_tails: outer >= 200 required");

        std::vector<double> mre(outer), mim(outer), inner_se(outer);
        parallel_for(threads, static_cast<std::size_t>(outer), [&](std::size_t o) {
            CounterRng ostream(rng.sub(o).sub(0));
            const OrthogonalMatrix omat = sample_haar_so(n, ostream);
            Eigen::MatrixXd theta(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    theta(i, j) = std::sqrt(0.5 * (omat.entries(i, j) * omat.entries(i, j) +
                                                   omat.entries(j, i) * omat.entries(j, i)));
            std::vector<double> sre(inner), sim(inner);
            for (int i = 0; i < inner; ++i) {
                CounterRng xs(rng.sub(o).sub(i + 1));
                const Eigen::MatrixXd x = sample_entry_matrix(dist, n, xs);
                const std::complex<double> s = stieltjes_eigenvalues_only(hadamard(theta, x), z);
                sre[i] = s.real();
                sim[i] = s.imag();
            }
            const std::complex<double> m = complex_mean(sre, sim);
            mre[o] = m.real();
            mim[o] = m.imag();
            inner_se[o] =
                std::sqrt((sample_variance(sre) + sample_variance(sim)) / static_cast<double>(inner));
        });
        const std::complex<double> grand = complex_mean(mre, mim);
        std::vector<double> stats(outer);
        for (int o = 0; o < outer; ++o)
            stats[o] = std::abs(std::complex<double>(mre[o], mim[o]) - grand);

        const BoundCertificate cert = cert_sudakov(n, z.v(), SudakovVariant::theta_plain);
        TailInputs in;
        in.name = "sudakov_theta_nested";
        in.t_grid = t_grid;
        in.stats = stats;
        in.cert = &cert;
        in.n = n;
        in.seed = rng.master_seed;
        in.inner_noise = mean(inner_se);
        return make_tail_result(in);
    }

    // x_pointwise: Prop. 2.2 second display needs sub-Gaussian Lipschitz
    // concentration for X; the Gaussian kind has r^2 = 2.
    if (dist.kind != EntryDistribution::Kind::standard_gaussian)
        throw std::invalid_argument("run_sudakov_tails: x_pointwise variant requires gaussian entries");
    if (outer < 200) throw std::domain_error("run_sudakov_tails: outer >= 200 required");

    CounterRng ostream(rng.sub(0));
    const OrthogonalMatrix omat = sample_haar_so(n, ostream);
    Eigen::MatrixXd theta(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            theta(i, j) = std::sqrt(0.5 * (omat.entries(i, j) * omat.entries(i, j) +
                                           omat.entries(j, i) * omat.entries(j, i)));
    const double max_theta = theta.maxCoeff();

    std::vector<double> sre(outer), sim(outer);
    parallel_for(threads, static_cast<std::size_t>(outer), [&](std::size_t r) {
        CounterRng xs(rng.sub(r + 1));
        const Eigen::MatrixXd x = sample_entry_matrix(dist, n, xs);
        const std::complex<double> s = stieltjes_eigenvalues_only(hadamard(theta, x), z);
        sre[r] = s.real();
        sim[r] = s.imag();
    });
    const std::complex<double> center = complex_mean(sre, sim);
    std::vector<double> stats(outer);
    for (int r = 0; r < outer; ++r)
        stats[r] = std::abs(std::complex<double>(sre[r], sim[r]) - center);

    const BoundCertificate cert =
        cert_sudakov(n, z.v(), SudakovVariant::x_pointwise, std::sqrt(2.0), max_theta);
    TailInputs in;
    in.name = "sudakov_x_pointwise";
    in.t_grid = t_grid;
    in.stats = stats;
    in.cert = &cert;
    in.n = n;
    in.seed = rng.master_seed;
    return make_tail_result(in);
}

TailExperimentResult run_lipschitz_tails(double p, int n, SphereMeasure measure,
                                         const LipschitzTestFunction& f, int replicas,
                                         std::span<const double> t_grid, RngState rng,
                                         int threads) {
    const double lip = f.lipschitz_p(p, n);
    std::vector<double> vals(replicas), weights;
    if (measure == SphereMeasure::surface) weights.resize(replicas);

    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        const SphereSample s = sample_cone(p, n, stream);
        vals[i] = f.fn.value(s.theta) / lip;
        if (measure == SphereMeasure::surface) weights[i] = surface_density_factor(s.theta, p);
    });

    double center;
    if (measure == SphereMeasure::surface) {
        std::vector<double> wv(replicas);
        for (int i = 0; i < replicas; ++i) wv[i] = weights[i] * vals[i];
        center = pairwise_sum(wv) / pairwise_sum(weights);
    } else {
        center = mean(vals);
    }
    std::vector<double> stats(replicas);
    for (int i = 0; i < replicas; ++i) stats[i] = std::abs(vals[i] - center);

    const BoundCertificate cert = measure == SphereMeasure::cone ? cert_cone_lipschitz(p, n)
                                                                 : cert_surface_lipschitz(p, n);
    TailInputs in;
    in.name = measure == SphereMeasure::cone ? "lipschitz_cone" : "lipschitz_surface";
    in.t_grid = t_grid;
    in.stats = stats;
    if (measure == SphereMeasure::surface) in.weights = weights;
    in.cert = &cert;
    in.n = n;
    in.p = p;
    in.seed = rng.master_seed;
    return make_tail_result(in);
}

LsqCheckResult run_lsq_empirical(double p, int n, const LsqTestFunction& f, int replicas,
                                 RngState rng, int threads) {
    if (replicas < 10000) throw std::domain_error("run_lsq_empirical: replicas >= 10^4 required");
    const double q = hoelder_conjugate(p);

    std::vector<double> g(replicas), glog(replicas), energy(replicas);
    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        const SphereSample s = sample_cone(p, n, stream);
        const double fv = std::abs(f.fn.value(s.theta));
        const double gv = std::pow(fv, q);
        g[i] = gv;
        glog[i] = gv > 0.0 ? gv * std::log(gv) : 0.0;
        const Eigen::VectorXd grad = f.fn.gradient(s.theta);
        energy[i] = std::pow(lp_norm(grad, q), q);
    });

    LsqCheckResult out;
    out.function_name = f.name;
    out.p = p;
    out.q = q;
    out.n = n;
    out.replicas = replicas;
    out.seed = rng.master_seed;
    out.sigma_q = lsq_constant_cone(p, n);

    const double a_hat = mean(glog);
    const double b_hat = mean(g);
    if (b_hat > 0.0) {
        out.entropy = a_hat - b_hat * std::log(b_hat);
        std::vector<double> u(replicas);
        for (int i = 0; i < replicas; ++i) u[i] = glog[i] - (std::log(b_hat) + 1.0) * g[i];
        out.entropy_se = standard_error(u);
    }
    out.energy = mean(energy);
    out.energy_se = standard_error(energy);
    out.bound = out.sigma_q * out.energy;

    const double combined = std::sqrt(out.entropy_se * out.entropy_se +
                                      1.1 * out.sigma_q * out.energy_se * 1.1 * out.sigma_q * out.energy_se);
    out.pass = out.entropy <= 1.1 * out.bound + 3.0 * combined;
    return out;
}

PolynomialTailResult run_polynomial_tails(double p, int n, const ElementaryPolynomial& poly,
                                          int replicas, std::span<const double> t_grid,
                                          RngState rng, int threads) {
    if (!(static_cast<double>(poly.m) > p))
        throw std::domain_error("run_polynomial_tails: m > p required");
    const double q = hoelder_conjugate(p);
    const int d = poly.m - static_cast<int>(std::ceil(p)) + 1;

    PolynomialTailResult out;
    out.d = d;
    out.exact_mean =
        (poly.m % 2 == 0) ? poly.a.sum() * exact_moment_cone(p, n, poly.m) : 0.0;

    // derivative norms: HS(q) route from exact coordinate moments for k < d,
    // the coefficient-norm Hoelder bound at k = d
    double falling = 1.0;
    double aq = 0.0;
    for (int j = 0; j < poly.a.size(); ++j) aq += std::pow(std::abs(poly.a(j)), q);
    for (int k = 1; k <= d; ++k) {
        falling *= static_cast<double>(poly.m - k + 1);
        if (k < d) {
            const double momq = exact_moment_cone(p, n, q * (poly.m - k));
            out.derivative_norms.push_back(falling * std::pow(aq * momq, 1.0 / q));
        } else {
            out.derivative_norms.push_back(falling * coefficient_norm(poly.a, p));
        }
    }

    const double sigma_tilde = std::pow(lsq_constant_cone(p, n), 1.0 / q);
    double lambda = 1.0 / out.derivative_norms[d - 1];
    for (int k = 1; k < d; ++k)
        lambda = std::min(lambda, std::pow(sigma_tilde, d - k) / out.derivative_norms[k - 1]);
    out.lambda = lambda;
    out.c_used = higher_order_expmoment_constant(HigherOrderSetting::cone, p, d) *
                 std::pow(lambda, p / static_cast<double>(d));

    std::vector<double> qvals(replicas), centered(replicas), expstat(replicas);
    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        const SphereSample s = sample_cone(p, n, stream);
        qvals[i] = poly(s.theta);
        centered[i] = std::abs(qvals[i] - out.exact_mean);
        expstat[i] = std::exp(out.c_used * n * std::pow(centered[i], p / static_cast<double>(d)));
    });

    out.empirical_mean = mean(qvals);
    out.empirical_mean_se = standard_error(qvals);
    out.exp_moment_mean = mean(expstat);
    out.exp_moment_se = standard_error(expstat);
    out.exp_moment_pass = out.exp_moment_mean <= 2.0 + 3.0 * out.exp_moment_se;

    const BoundCertificate cert = cert_higher_order(HigherOrderSetting::cone, p, d,
                                                    static_cast<double>(n), out.derivative_norms);
    TailInputs in;
    in.name = "polynomial_q" + std::to_string(poly.m);
    in.t_grid = t_grid;
    in.stats = centered;
    in.cert = &cert;
    in.n = n;
    in.p = p;
    in.seed = rng.master_seed;
    out.tails = make_tail_result(in);
    return out;
}

double polynomial_stddev_slope(double p, int m, std::span<const int> n_list, int replicas,
                               RngState rng, int threads) {
    std::vector<double> logn, logsd;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const int n = n_list[ni];
        Eigen::VectorXd a = Eigen::VectorXd::Ones(n);
        const double norm = coefficient_norm(a, p);
        if (norm > 1.0) a /= norm;
        const ElementaryPolynomial poly = ElementaryPolynomial::checked(m, a, p);

        std::vector<double> vals(replicas);
        const RngState base = rng.sub(ni);
        parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
            CounterRng stream(base.sub(i));
            vals[i] = poly(sample_cone(p, n, stream).theta);
        });
        logn.push_back(std::log(static_cast<double>(n)));
        logsd.push_back(std::log(std::sqrt(sample_variance(vals))));
    }
    return fit_slope(logn, logsd);
}

HansonWrightResult run_hanson_wright(double p, int n, const Eigen::MatrixXd& a, int replicas,
                                     std::span<const double> t_grid, RngState rng, double c_p,
                                     int threads) {
    if ((a - a.transpose()).cwiseAbs().maxCoeff() != 0.0)
        throw std::domain_error("run_hanson_wright: A must be symmetric");
    const double q = hoelder_conjugate(p);

    HansonWrightResult out;
    out.a_hs_q = matrix_hs_q_norm(a, q);
    out.a_op_q = matrix_op_q_norm(a, p);
    out.sigma = std::pow(lsq_constant_cone(p, n), 1.0 / q);
    out.exact_center = a.trace() * exact_moment_cone(p, n, 2.0);

    std::vector<double> vals(replicas), stats(replicas);
    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        const SphereSample s = sample_cone(p, n, stream);
        vals[i] = s.theta.dot(a * s.theta);
        stats[i] = std::abs(vals[i] - out.exact_center);
    });
    out.empirical_mean = mean(vals);
    out.empirical_mean_se = standard_error(vals);
    // degenerate statistics (p=2 with A=I) have stderr at ulp scale
    out.center_ok = std::abs(out.empirical_mean - out.exact_center) <=
                    3.0 * out.empirical_mean_se + 1e-12 * std::max(1.0, std::abs(out.exact_center));

    const BoundCertificate cert = cert_hanson_wright(p, out.sigma, out.a_hs_q, out.a_op_q, c_p);
    TailInputs in;
    in.name = "hanson_wright";
    in.t_grid = t_grid;
    in.stats = stats;
    in.cert = &cert;
    in.n = n;
    in.p = p;
    in.seed = rng.master_seed;
    out.tails = make_tail_result(in);
    return out;
}

EdgeworthResult run_edgeworth(const SymmetricFunctionFamily& fam, int n, int replicas,
                              RngState rng, int threads) {
    if (family_property_defect(fam, std::min(n, 12), rng.sub(0xFA111E5), 10) > 1e-9)
        throw std::domain_error("run_edgeworth: family violates the symmetry properties");

    std::vector<double> ratios(replicas);
    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        const SphereSample s = sample_cone(2.0, n, stream);
        double s3 = 0.0, s4 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t2 = s.theta(j) * s.theta(j);
            s3 += t2 * s.theta(j);
            s4 += t2 * t2;
        }
        const double r4 = fam.h(s.theta) - fam.h_inf - (fam.cubic_coeff / 6.0) * s3;
        ratios[i] = std::abs(r4) / s4;
    });

    EdgeworthResult out;
    out.family = fam.name;
    out.n = n;
    out.replicas = replicas;
    out.seed = rng.master_seed;
    out.residual_ratio_max = *std::max_element(ratios.begin(), ratios.end());
    out.residual_ratio_mean = mean(ratios);
    out.gamma_b = fam.gamma * fam.deriv_bound;
    out.ratio_bounded = out.residual_ratio_max <= out.gamma_b * (1.0 + 1e-9) + 1e-12;
    out.cubic_coeff = fam.cubic_coeff;
    return out;
}

TailExperimentResult run_symmetric_tails(const SymmetricFunctionFamily& fam, int n, int replicas,
                                         std::span<const double> t_grid, RngState rng,
                                         int threads) {
    std::vector<double> stats(replicas);
    parallel_for(threads, static_cast<std::size_t>(replicas), [&](std::size_t i) {
        CounterRng stream(rng.sub(i));
        const SphereSample s = sample_cone(2.0, n, stream);
        stats[i] = n * std::abs(fam.h(s.theta) - fam.h_inf);
    });

    const BoundCertificate cert =
        cert_symmetric_fn_explicit(fam.deriv_bound, fam.b_star(), fam.gamma);
    TailInputs in;
    in.name = "symmetric_fn_" + fam.name;
    in.t_grid = t_grid;
    in.stats = stats;
    in.cert = &cert;
    in.n = n;
    in.p = 2.0;
    in.seed = rng.master_seed;
    return make_tail_result(in);
}

} // namespace conclab
