#pragma once

#include <array>
#include <vector>

namespace relight {

using Vec3 = std::array<double, 3>;

/// One parametric point light.
///
/// `position` is (x, y) in normalized image coordinates and z in depth units,
/// all nominally in [0,1]. `ellipsoid_ratio` scales only the vertical
/// component of the light direction; `diffuse_exponent` is the power applied
/// to the light-to-surface distance.
struct PointLight {
    Vec3 color{0.5, 0.5, 0.5};
    Vec3 position{0.5, 0.5, 0.5};
    double intensity = 1.0;
    double ellipsoid_ratio = 1.0;
    double diffuse_exponent = 1.0;

    friend bool operator==(const PointLight&, const PointLight&) = default;
};

using LightList = std::vector<PointLight>;

/// Throws ValidationError when a light breaks its invariants:
/// intensity >= 0, ellipsoid_ratio > 0, diffuse_exponent > 0, color in [0,1],
/// all fields finite.
void validate_light(const PointLight& light);

}  // namespace relight
