#pragma once

// Single-threaded reference kernels. They mirror the parallel kernels loop
// for loop and are kept for equivalence tests and benchmarks.

#include <span>
#include <vector>

#include "relight/fitter.hpp"
#include "relight/renderer.hpp"

namespace relight::reference {

ShadingMap shade_single(const PointLight& light, const SceneMaps& scene);
ShadingMap shade_all(std::span<const PointLight> lights, const SceneMaps& scene);
LossAndGradient fit_loss_and_grad(std::span<const PointLight> lights, const SceneMaps& scene,
                                  const ImageF& target);

}  // namespace relight::reference
