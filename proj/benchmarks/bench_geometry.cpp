#include "ecgpaper/geometry.hpp"
#include "ecgpaper/rng.hpp"

#include <benchmark/benchmark.h>

using namespace ecgpaper;

static void BM_SolveHomography(benchmark::State& state) {
    Rng rng(1);
    const Quad src = Quad::image_corners(2000, 800);
    Quad dst = src;
    for (auto& p : dst.pts) p = {p.x + rng.uniform(-80, 80), p.y + rng.uniform(-80, 80)};
    for (auto _ : state) benchmark::DoNotOptimize(solve_homography(src, dst));
}
BENCHMARK(BM_SolveHomography);

static void BM_HomographyApply(benchmark::State& state) {
    const Homography h = solve_homography(Quad::image_corners(100, 100),
                                          Quad{{Point{3, 1}, Point{97, 4}, Point{101, 95}, Point{-2, 99}}});
    Point p{10, 20};
    for (auto _ : state) {
        p = h.apply(p);
        benchmark::DoNotOptimize(p);
        p = {10, 20};
    }
}
BENCHMARK(BM_HomographyApply);
