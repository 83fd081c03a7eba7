#include "relight/transfer.hpp"

#include <algorithm>

#include "relight/errors.hpp"
#include "relight/renderer.hpp"

namespace relight {

LightList adapt_lights(std::span<const PointLight> lights, const ImageF& fit_depth, const ImageF& target_depth) {
    require_channels(fit_depth, 1, "fit depth");
    require_channels(target_depth, 1, "target depth");
    if (fit_depth.empty() || target_depth.empty()) throw ValidationError("transfer depth map is empty");
    for (const ImageF* d : {&fit_depth, &target_depth}) {
        for (double v : d->data()) {
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("transfer depth outside [0,1]");
        }
    }

    LightList out(lights.begin(), lights.end());
    for (PointLight& l : out) {
        validate_light(l);
        for (double p : l.position) {
            if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("light position outside [0,1]^3");
        }
        const double x = l.position[0];
        const double y = l.position[1];
        const double fit_surface = sample_bilinear(fit_depth, x, y);
        const double target_surface = sample_bilinear(target_depth, x, y);
        // d + (z - d) can round away from z; equal surfaces leave z untouched.
        if (fit_surface == target_surface) continue;
        const double lift = l.position[2] - fit_surface;
        l.position[2] = std::clamp(target_surface + lift, 0.0, 1.0);
    }
    return out;
}

ImageF relight_background(std::span<const PointLight> lights, const ImageF& fit_depth,
                          const SceneMaps& target_scene) {
    const LightList adapted = adapt_lights(lights, fit_depth, target_scene.depth());
    return compose(target_scene.albedo(), shade_all(adapted, target_scene));
}

}  // namespace relight
