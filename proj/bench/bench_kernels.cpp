#include <benchmark/benchmark.h>

#include <cmath>

#include "relight/fitter.hpp"
#include "relight/reference.hpp"
#include "relight/renderer.hpp"
#include "relight/rng.hpp"

using namespace relight;

namespace {

SceneMaps bench_scene(int size) {
    Rng rng(1);
    ImageF albedo(size, size, 3), normal(size, size, 3), depth(size, size, 1);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const double x = (c + 0.5) / size - 0.5, y = (r + 0.5) / size - 0.5;
            depth.at(r, c) = 0.2 + 0.1 * std::exp(-8.0 * (x * x + y * y));
            const double gx = -1.6 * x * (depth.at(r, c) - 0.2), gy = -1.6 * y * (depth.at(r, c) - 0.2);
            const double len = std::sqrt(gx * gx + gy * gy + 1.0);
            normal.at(r, c, 0) = -gx / len;
            normal.at(r, c, 1) = -gy / len;
            normal.at(r, c, 2) = 1.0 / len;
            for (int k = 0; k < 3; ++k) albedo.at(r, c, k) = rng.uniform(0.3, 1.0);
        }
    }
    return SceneMaps(std::move(albedo), std::move(normal), std::move(depth));
}

LightList bench_lights(int n) {
    Rng rng(2);
    LightList lights(n);
    for (PointLight& l : lights) {
        l.color = {rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)};
        l.position = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.5, 0.9)};
        l.intensity = rng.uniform(0.1, 0.5);
    }
    return lights;
}

void BM_ShadeReference(benchmark::State& state) {
    const SceneMaps scene = bench_scene(static_cast<int>(state.range(0)));
    const LightList lights = bench_lights(20);
    for (auto _ : state) benchmark::DoNotOptimize(reference::shade_all(lights, scene));
}

void BM_ShadeParallel(benchmark::State& state) {
    const SceneMaps scene = bench_scene(static_cast<int>(state.range(0)));
    const LightList lights = bench_lights(20);
    for (auto _ : state) benchmark::DoNotOptimize(shade_all(lights, scene));
}

void BM_LossGradReference(benchmark::State& state) {
    const SceneMaps scene = bench_scene(static_cast<int>(state.range(0)));
    const LightList lights = bench_lights(20);
    const ImageF target = compose(scene.albedo(), shade_all(bench_lights(5), scene));
    for (auto _ : state) benchmark::DoNotOptimize(reference::fit_loss_and_grad(lights, scene, target));
}

void BM_LossGradParallel(benchmark::State& state) {
    const SceneMaps scene = bench_scene(static_cast<int>(state.range(0)));
    const LightList lights = bench_lights(20);
    const ImageF target = compose(scene.albedo(), shade_all(bench_lights(5), scene));
    for (auto _ : state) benchmark::DoNotOptimize(fit_loss_and_grad(lights, scene, target));
}

}  // namespace

BENCHMARK(BM_ShadeReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShadeParallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossGradReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossGradParallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
