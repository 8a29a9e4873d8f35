#include <benchmark/benchmark.h>

#include <random>

#include "cwbnlw/operator.hpp"
#include "cwbnlw/p_solver.hpp"
#include "cwbnlw/separation.hpp"

namespace {

using namespace cwbnlw;

FourierField random_field(int d, int radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FourierField f(d);
    SiteBasis basis = SiteBasis::ball(ProblemParams::make(d, std::vector<int>(d, 1), 1.3, 0.0, 0.0),
                                      ResonantSet{}, radius + 1);
    for (const auto& xi : basis.sites())
        if (xi.is_canonical())
            f.set_pair(xi, (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) *
                               std::exp(-0.3 * xi.one_norm()));
    return f;
}

void BM_CubeDirect(benchmark::State& state) {
    FourierField f = random_field(1, static_cast<int>(state.range(0)), 7);
    FieldOptions opt;
    opt.fft_threshold = 1u << 30;
    for (auto _ : state) benchmark::DoNotOptimize(pointwise_cube(f, opt));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CubeDirect)->Arg(4)->Arg(8)->Arg(16)->Complexity();

void BM_CubeFft(benchmark::State& state) {
    FourierField f = random_field(1, static_cast<int>(state.range(0)), 7);
    FieldOptions opt;
    opt.fft_threshold = 0;
    for (auto _ : state) benchmark::DoNotOptimize(pointwise_cube(f, opt));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CubeFft)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_AssembleAndInvert(benchmark::State& state) {
    auto params = ProblemParams::make(1, {1}, std::sqrt(2.0), 0.05, 1e-3);
    ResonantSet S = resonant_set(params);
    Amplitudes amp{1.5, {0.0}};
    FourierField u0 = build_seed_field(params, S, amp);
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        TruncatedOperator T = assemble(u0, params.lambda0 + 0.01, params, S, N,
                                       OperatorKind::T_tilde);
        benchmark::DoNotOptimize(invert_with_certificate(T, 2.5, 0.04));
    }
    state.SetComplexityN(N);
}
BENCHMARK(BM_AssembleAndInvert)->Arg(8)->Arg(16)->Arg(24)->Complexity();

void BM_SingularSites(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(singular_sites(1.5537739740300374, N, 2.0, 2));
    state.SetComplexityN(N);
}
BENCHMARK(BM_SingularSites)->Arg(64)->Arg(128)->Arg(256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
