#include "ecgpaper/eval.hpp"
#include "ecgpaper/rng.hpp"

#include <benchmark/benchmark.h>

using namespace ecgpaper;

static void BM_Auroc(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = rng.uniform();
        y[i] = rng.uniform() < 0.25;
    }
    y[0] = 0;
    y[1] = 1;
    for (auto _ : state) benchmark::DoNotOptimize(auroc(s, y));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(10)->Range(100, 100000)->Complexity(benchmark::oNLogN);

static void BM_HardVote(benchmark::State& state) {
    Rng rng(4);
    VoteMatrix v(5, 2000);
    for (std::size_t m = 0; m < 5; ++m) {
        for (std::size_t s = 0; s < 2000; ++s) {
            for (std::size_t l = 0; l < kLabelCount; ++l) v.set(m, s, l, rng.uniform() < 0.3);
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(hard_vote(v));
}
BENCHMARK(BM_HardVote);
