#include "ecgpaper/distort.hpp"
#include "ecgpaper/rectify.hpp"
#include "ecgpaper/render.hpp"
#include "ecgpaper/waveform.hpp"

#include <benchmark/benchmark.h>

using namespace ecgpaper;

namespace {

const PaperImage& page() {
    static const PaperImage img = render_record(synthesize_record("bench", 3, 500, 10.0));
    return img;
}

const RecipeResult& distorted() {
    static const RecipeResult r = [] {
        DistortionRecipe recipe;
        recipe.seed = 9;
        recipe.margin = 0.12;
        recipe.steps = {ShadowStep{.intensity = 0.4}, PerspectiveStep{.jitter = 0.08}};
        return apply_recipe(page(), recipe);
    }();
    return r;
}

} // namespace

static void BM_RenderRecord(benchmark::State& state) {
    const EcgRecord rec = synthesize_record("bench", 3, 500, 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(render_record(rec));
}
BENCHMARK(BM_RenderRecord)->Unit(benchmark::kMillisecond);

static void BM_Clahe(benchmark::State& state) {
    const Image& img = page().raster;
    for (auto _ : state) benchmark::DoNotOptimize(clahe(img, {8, 8}, 2.0));
    state.SetItemsProcessed(state.iterations() * img.width() * img.height());
}
BENCHMARK(BM_Clahe)->Unit(benchmark::kMillisecond);

static void BM_Distort(benchmark::State& state) {
    DistortionRecipe recipe;
    recipe.seed = 9;
    recipe.margin = 0.12;
    recipe.steps = {ShadowStep{.intensity = 0.4}, PerspectiveStep{.jitter = 0.08}};
    for (auto _ : state) benchmark::DoNotOptimize(apply_recipe(page(), recipe));
}
BENCHMARK(BM_Distort)->Unit(benchmark::kMillisecond);

static void BM_FindCorners(benchmark::State& state) {
    const Image& img = distorted().image.raster;
    for (auto _ : state) benchmark::DoNotOptimize(find_corners(img, coarse_locate(img)));
}
BENCHMARK(BM_FindCorners)->Unit(benchmark::kMillisecond);

static void BM_RectifyPipeline(benchmark::State& state) {
    const Image& img = distorted().image.raster;
    for (auto _ : state) benchmark::DoNotOptimize(rectify_pipeline(img));
}
BENCHMARK(BM_RectifyPipeline)->Unit(benchmark::kMillisecond);
