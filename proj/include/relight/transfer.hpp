#pragma once

#include <span>

#include "relight/image.hpp"
#include "relight/light.hpp"

namespace relight {

/// Moves each light so its height above the target surface matches its
/// height above the fit surface, both sampled bilinearly at the light's
/// (x, y). The new z is clamped to [0,1]; every other field is untouched.
LightList adapt_lights(std::span<const PointLight> lights, const ImageF& fit_depth,
                       const ImageF& target_depth);

/// Renders target albedo under the adapted lights.
ImageF relight_background(std::span<const PointLight> lights, const ImageF& fit_depth,
                          const SceneMaps& target_scene);

}  // namespace relight
