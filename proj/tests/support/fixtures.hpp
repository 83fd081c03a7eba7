#pragma once

// Scene builders and independent oracles shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "relight/image.hpp"
#include "relight/light.hpp"
#include "relight/rng.hpp"

namespace relight::testing {

inline ImageF constant_image(int w, int h, int channels, double value) { return ImageF(w, h, channels, value); }

inline ImageF constant_normals(int w, int h, double nx, double ny, double nz) {
    ImageF n(w, h, 3);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            n.at(r, c, 0) = nx;
            n.at(r, c, 1) = ny;
            n.at(r, c, 2) = nz;
        }
    }
    return n;
}

/// Frontal plane: normals (0,0,1), constant depth and albedo.
inline SceneMaps flat_plane(int w, int h, double depth = 0.0, double albedo = 1.0) {
    return SceneMaps(constant_image(w, h, 3, albedo), constant_normals(w, h, 0, 0, 1), constant_image(w, h, 1, depth));
}

/// Smooth bump surface z = base + amp * exp(-r^2/s^2) with analytic normals
/// and a random albedo texture in [0.3, 1].
inline SceneMaps bumpy_scene(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    const double cx = rng.uniform(0.3, 0.7), cy = rng.uniform(0.3, 0.7);
    const double amp = rng.uniform(0.05, 0.2), s = rng.uniform(0.2, 0.4), base = rng.uniform(0.0, 0.2);
    ImageF albedo(w, h, 3), normal(w, h, 3), depth(w, h, 1);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double x = (c + 0.5) / w, y = (r + 0.5) / h;
            const double g = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (s * s));
            depth.at(r, c) = base + amp * g;
            const double dzdx = amp * g * (-2.0 * (x - cx) / (s * s));
            const double dzdy = amp * g * (-2.0 * (y - cy) / (s * s));
            const double len = std::sqrt(dzdx * dzdx + dzdy * dzdy + 1.0);
            normal.at(r, c, 0) = -dzdx / len;
            normal.at(r, c, 1) = -dzdy / len;
            normal.at(r, c, 2) = 1.0 / len;
            for (int k = 0; k < 3; ++k) albedo.at(r, c, k) = rng.uniform(0.3, 1.0);
        }
    }
    return SceneMaps(std::move(albedo), std::move(normal), std::move(depth));
}

inline PointLight random_light(Rng& rng) {
    PointLight l;
    l.color = {rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)};
    l.position = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.4, 0.9)};
    l.intensity = rng.uniform(0.2, 1.0);
    l.ellipsoid_ratio = rng.uniform(0.6, 1.5);
    l.diffuse_exponent = rng.uniform(0.6, 1.8);
    return l;
}

/// Direct transcription of the shading model with std::pow and explicit
/// loops; shares no code with the library kernels.
inline double naive_shading(const PointLight& l, const SceneMaps& s, int row, int col, int ch) {
    const double x = (col + 0.5) / s.width();
    const double y = (row + 0.5) / s.height();
    const double z = s.depth().at(row, col);
    const double vx = l.position[0] - x, vy = l.position[1] - y, vz = l.position[2] - z;
    const double dist = std::sqrt(vx * vx + vy * vy + vz * vz);
    if (dist < 1e-6) return 0.0;
    const double denom = std::pow(dist, l.diffuse_exponent);
    const double dot = (s.normal().at(row, col, 0) * vx + s.normal().at(row, col, 1) * l.ellipsoid_ratio * vy +
                        s.normal().at(row, col, 2) * vz) /
                       denom;
    return l.color[ch] * l.intensity * (dot > 0.0 ? dot : 0.0);
}

inline double naive_loss(const std::vector<PointLight>& lights, const SceneMaps& s, const ImageF& target) {
    double sum = 0.0;
    for (int r = 0; r < s.height(); ++r) {
        for (int c = 0; c < s.width(); ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                double shade = 0.0;
                for (const auto& l : lights) shade += naive_shading(l, s, r, c, ch);
                const double d = target.at(r, c, ch) - s.albedo().at(r, c, ch) * shade;
                sum += d * d;
            }
        }
    }
    return sum / (3.0 * s.width() * s.height());
}

inline ImageF naive_render(const std::vector<PointLight>& lights, const SceneMaps& s) {
    ImageF out(s.width(), s.height(), 3);
    for (int r = 0; r < s.height(); ++r) {
        for (int c = 0; c < s.width(); ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                double shade = 0.0;
                for (const auto& l : lights) shade += naive_shading(l, s, r, c, ch);
                out.at(r, c, ch) = s.albedo().at(r, c, ch) * shade;
            }
        }
    }
    return out;
}

inline double max_abs_diff(const ImageF& a, const ImageF& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

/// Fresh scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("relight_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace relight::testing
