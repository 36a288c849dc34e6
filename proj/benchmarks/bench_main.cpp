#include <benchmark/benchmark.h>

#include <memory>

#include "avoidwalk/conditioned.hpp"
#include "avoidwalk/gap.hpp"
#include "avoidwalk/jump_chain.hpp"
#include "avoidwalk/ladder.hpp"
#include "avoidwalk/oracle.hpp"

using namespace avoidwalk;

static void BM_SampleSteps(benchmark::State& state) {
    auto law = StepLaw::tent();
    RngStream rng(1, 0);
    long long pos = 0;
    for (auto _ : state) pos += law.sample_step_units(rng);
    benchmark::DoNotOptimize(pos);
}
BENCHMARK(BM_SampleSteps);

static void BM_GaussSteps(benchmark::State& state) {
    auto law = StepLaw::gauss();
    RngStream rng(1, 0);
    double pos = 0;
    for (auto _ : state) pos += law.sample_step_real(rng);
    benchmark::DoNotOptimize(pos);
}
BENCHMARK(BM_GaussSteps);

static void BM_CappedHit(benchmark::State& state) {
    auto law = StepLaw::tent();
    auto B = AvoidSet::parse("points{0}", law);
    RngStream rng(1, 0);
    for (auto _ : state) {
        JumpChain jc = simulate_capped_hit(law, 1.0, B, 100000, rng);
        benchmark::DoNotOptimize(jc.tau);
    }
}
BENCHMARK(BM_CappedHit);

static void BM_BackwardDPStep(benchmark::State& state) {
    auto law = StepLaw::tent();
    auto B = AvoidSet::parse("points{0}", law);
    const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        SurvivalGrid g = survival_grid(law, B, 1, 1, n, {}, {}, false, 1);
        benchmark::DoNotOptimize(g.q_final[0]);
    }
    state.SetComplexityN(static_cast<int64_t>(n));
}
BENCHMARK(BM_BackwardDPStep)->Arg(256)->Arg(1024)->Complexity();

static void BM_HChainStep(benchmark::State& state) {
    auto law = StepLaw::tent();
    auto sys = std::make_shared<LadderSystem>(law);
    auto U = std::make_shared<RenewalU>(sys);
    HChain chain(U, HChain::Side::NonNegative, 1 << 14);
    RngStream rng(1, 0);
    for (auto _ : state) benchmark::DoNotOptimize(chain.step(rng));
}
BENCHMARK(BM_HChainStep);

static void BM_GapStatistics(benchmark::State& state) {
    auto law = StepLaw::tent();
    RngStream rng(1, 0);
    Path p = sample_path(law, 0.0, 100000, rng);
    for (auto _ : state) {
        GapStats st = gap_statistics(p, 47);
        benchmark::DoNotOptimize(st.gap);
    }
}
BENCHMARK(BM_GapStatistics);

BENCHMARK_MAIN();
