#pragma once

#include <cmath>
#include <span>

#include "relight/image.hpp"
#include "relight/light.hpp"

namespace relight {

/// Nonnegative 3-channel shading image with the dimensions of its scene.
using ShadingMap = ImageF;

/// Pixels closer to a light than this receive no shading from it.
inline constexpr double kSingularDistance = 1e-6;

/// Geometry of one light seen from one surface point. Shared by the shading
/// kernels and the loss gradient.
struct LightSample {
    double dx = 0, dy = 0, dz = 0;  // light minus surface point
    double r2 = 0;                  // squared distance, ellipsoid ratio excluded
    double n_dot_v = 0;             // N . (dx, ratio*dy, dz)
    double falloff = 0;             // r^-exponent
    double cosine = 0;              // n_dot_v * falloff, before clamping
    bool singular = true;
};

/// Evaluates the light direction term at surface point (x, y, z) with normal n.
inline LightSample sample_light(const PointLight& light, double x, double y, double z,
                                const double* n);

/// Scalar (color-free) shading of one light: intensity * max(0, N . l).
inline double light_response(const PointLight& light, double x, double y, double z,
                             const double* n) {
    const LightSample s = sample_light(light, x, y, z, n);
    if (s.singular || s.cosine <= 0.0) return 0.0;
    return light.intensity * s.cosine;
}

/// Shading of a single light. Rows are evaluated in parallel.
ShadingMap shade_single(const PointLight& light, const SceneMaps& scene);

/// Pixelwise sum of shade_single over `lights`, accumulated in list order so
/// the result does not depend on the thread count.
ShadingMap shade_all(std::span<const PointLight> lights, const SceneMaps& scene);

/// Per-pixel, per-channel product albedo * shading. No clamping.
ImageF compose(const ImageF& albedo, const ShadingMap& shading);

/// mask * foreground + (1 - mask) * background.
ImageF composite_mask(const ImageF& foreground, const ImageF& background, const ImageF& mask);

// ---------------------------------------------------------------------------

inline LightSample sample_light(const PointLight& light, double x, double y, double z,
                                const double* n) {
    LightSample s;
    s.dx = light.position[0] - x;
    s.dy = light.position[1] - y;
    s.dz = light.position[2] - z;
    s.r2 = s.dx * s.dx + s.dy * s.dy + s.dz * s.dz;
    if (s.r2 < kSingularDistance * kSingularDistance) return s;
    s.singular = false;
    s.n_dot_v = n[0] * s.dx + light.ellipsoid_ratio * n[1] * s.dy + n[2] * s.dz;
    // r^-sigma evaluated from the squared distance.
    s.falloff = light.diffuse_exponent == 1.0 ? 1.0 / std::sqrt(s.r2)
                                              : std::exp(-0.5 * light.diffuse_exponent * std::log(s.r2));
    s.cosine = s.n_dot_v * s.falloff;
    return s;
}

}  // namespace relight
