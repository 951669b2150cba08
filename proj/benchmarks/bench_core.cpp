#include <benchmark/benchmark.h>

#include "conclab/certificates.hpp"
#include "conclab/exact_moments.hpp"
#include "conclab/sampling.hpp"
#include "conclab/spectral.hpp"
#include "conclab/weights.hpp"

using namespace conclab;

static void BM_SampleHaarSO(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    CounterRng rng(RngState{1, 0});
    for (auto _ : state) {
        OrthogonalMatrix o = sample_haar_so(n, rng);
        benchmark::DoNotOptimize(o.entries.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleHaarSO)->RangeMultiplier(2)->Range(25, 400)->Complexity();

static void BM_SampleCone(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    CounterRng rng(RngState{2, 0});
    for (auto _ : state) {
        SphereSample s = sample_cone(4.0, n, rng);
        benchmark::DoNotOptimize(s.theta.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleCone)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

static void BM_BuildTheta(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    CounterRng rng(RngState{3, 0});
    const OrthogonalMatrix o = sample_haar_so(n, rng);
    for (auto _ : state) {
        WeightMatrix w = build_theta(o);
        benchmark::DoNotOptimize(w.theta.data());
    }
}
BENCHMARK(BM_BuildTheta)->Arg(50)->Arg(200);

static void BM_StieltjesEmpirical(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    CounterRng rng(RngState{4, 0});
    const Eigen::MatrixXd m =
        sample_entry_matrix(EntryDistribution::gaussian(), n, rng) / std::sqrt(n);
    const SpectralPoint z(0.2, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(stieltjes_empirical(m, z));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StieltjesEmpirical)->RangeMultiplier(2)->Range(50, 400)->Complexity();

static void BM_ResolventFromDecomposition(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    CounterRng rng(RngState{5, 0});
    const Eigen::MatrixXd m =
        sample_entry_matrix(EntryDistribution::gaussian(), n, rng) / std::sqrt(n);
    const EigenDecomposition ed = eigen_symmetric(m);
    const SpectralPoint z(0.2, 0.5);
    for (auto _ : state) {
        Resolvent r = resolvent(ed, z);
        benchmark::DoNotOptimize(r.entries.data());
    }
}
BENCHMARK(BM_ResolventFromDecomposition)->Arg(50)->Arg(100);

static void BM_ExactMomentCone(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_moment_cone(3.0, 1000, 4.0));
    }
}
BENCHMARK(BM_ExactMomentCone);

static void BM_CertificateGrid(benchmark::State& state) {
    const BoundCertificate cert = cert_surface_lipschitz(4.0, 100);
    for (auto _ : state) {
        double acc = 0.0;
        for (int i = 0; i < 100; ++i) acc += cert.probability(0.01 * i);
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_CertificateGrid);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
