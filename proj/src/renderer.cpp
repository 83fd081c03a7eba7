#include "relight/renderer.hpp"

#include "relight/errors.hpp"

namespace relight {

namespace {

void require_scene_shape(const SceneMaps& scene) {
    if (scene.width() <= 0 || scene.height() <= 0) throw ValidationError("scene has no pixels");
}

/// Accumulates the shading of `lights` into one output row.
void shade_row(std::span<const PointLight> lights, const SceneMaps& scene, int row, std::span<double> out) {
    const int width = scene.width();
    const double y = pixel_center(row, scene.height());
    const auto normals = scene.normal().row(row);
    const auto depth = scene.depth().row(row);
    for (int col = 0; col < width; ++col) {
        const double x = pixel_center(col, width);
        const double* n = &normals[3 * col];
        double* px = &out[3 * col];
        for (const PointLight& light : lights) {
            const double g = light_response(light, x, y, depth[col], n);
            px[0] += light.color[0] * g;
            px[1] += light.color[1] * g;
            px[2] += light.color[2] * g;
        }
    }
}

}  // namespace

ShadingMap shade_single(const PointLight& light, const SceneMaps& scene) {
    return shade_all(std::span<const PointLight>(&light, 1), scene);
}

ShadingMap shade_all(std::span<const PointLight> lights, const SceneMaps& scene) {
    require_scene_shape(scene);
    ShadingMap out(scene.width(), scene.height(), 3);
    const int height = scene.height();
#pragma omp parallel for schedule(static)
    for (int row = 0; row < height; ++row) shade_row(lights, scene, row, out.row(row));
    return out;
}

ImageF compose(const ImageF& albedo, const ShadingMap& shading) {
    require_same_size(albedo, shading, "compose");
    require_channels(albedo, 3, "compose albedo");
    require_channels(shading, 3, "compose shading");
    ImageF out(albedo.width(), albedo.height(), 3);
    const auto a = albedo.data();
    const auto s = shading.data();
    auto o = out.data();
    const auto n = static_cast<std::ptrdiff_t>(o.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) o[i] = a[i] * s[i];
    return out;
}

ImageF composite_mask(const ImageF& foreground, const ImageF& background, const ImageF& mask) {
    require_same_size(foreground, background, "composite foreground/background");
    require_same_size(foreground, mask, "composite mask");
    if (foreground.channels() != background.channels()) {
        throw ValidationError("composite: foreground and background channel counts differ");
    }
    require_channels(mask, 1, "composite mask");
    for (double m : mask.data()) {
        if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("composite: mask outside [0,1]");
    }
    const int channels = foreground.channels();
    ImageF out(foreground.width(), foreground.height(), channels);
    const auto fg = foreground.data();
    const auto bg = background.data();
    const auto m = mask.data();
    auto o = out.data();
    const auto pixels = static_cast<std::ptrdiff_t>(m.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < pixels; ++p) {
        for (int c = 0; c < channels; ++c) {
            const std::size_t i = static_cast<std::size_t>(p) * channels + c;
            o[i] = m[p] * fg[i] + (1.0 - m[p]) * bg[i];
        }
    }
    return out;
}

}  // namespace relight
