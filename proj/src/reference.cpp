#include "relight/reference.hpp"

#include <cmath>

#include "relight/errors.hpp"

namespace relight::reference {

ShadingMap shade_single(const PointLight& light, const SceneMaps& scene) {
    return reference::shade_all(std::span<const PointLight>(&light, 1), scene);
}

ShadingMap shade_all(std::span<const PointLight> lights, const SceneMaps& scene) {
    ShadingMap out(scene.width(), scene.height(), 3);
    for (int row = 0; row < scene.height(); ++row) {
        const double y = pixel_center(row, scene.height());
        for (int col = 0; col < scene.width(); ++col) {
            const double x = pixel_center(col, scene.width());
            const double n[3] = {scene.normal().at(row, col, 0), scene.normal().at(row, col, 1),
                                 scene.normal().at(row, col, 2)};
            for (const PointLight& light : lights) {
                const double g = light_response(light, x, y, scene.depth().at(row, col), n);
                for (int c = 0; c < 3; ++c) out.at(row, col, c) += light.color[c] * g;
            }
        }
    }
    return out;
}

LossAndGradient fit_loss_and_grad(std::span<const PointLight> lights, const SceneMaps& scene,
                                  const ImageF& target) {
    require_same_size(scene.albedo(), target, "reference fit target/scene");
    const std::size_t n = lights.size();
    std::vector<LightParams> grad(n, LightParams{});
    double loss = 0.0;

    for (int row = 0; row < scene.height(); ++row) {
        const double y = pixel_center(row, scene.height());
        for (int col = 0; col < scene.width(); ++col) {
            const double x = pixel_center(col, scene.width());
            const double z = scene.depth().at(row, col);
            const double nrm[3] = {scene.normal().at(row, col, 0), scene.normal().at(row, col, 1),
                                   scene.normal().at(row, col, 2)};

            double shade[3] = {0, 0, 0};
            for (const PointLight& l : lights) {
                const double g = light_response(l, x, y, z, nrm);
                for (int c = 0; c < 3; ++c) shade[c] += l.color[c] * g;
            }
            double e[3];
            for (int c = 0; c < 3; ++c) {
                const double a = scene.albedo().at(row, col, c);
                const double resid = a * shade[c] - target.at(row, col, c);
                loss += resid * resid;
                e[c] = 2.0 * resid * a;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const PointLight& l = lights[i];
                const LightSample s = sample_light(l, x, y, z, nrm);
                const double g = light_response(l, x, y, z, nrm);
                for (int c = 0; c < 3; ++c) grad[i][c] += e[c] * g;
                if (s.singular || !(s.cosine > 0.0)) continue;
                const double w = e[0] * l.color[0] + e[1] * l.color[1] + e[2] * l.color[2];
                const double common = w * l.intensity * s.falloff;
                const double t = l.diffuse_exponent * s.n_dot_v / s.r2;
                grad[i][3] += common * (nrm[0] - t * s.dx);
                grad[i][4] += common * (l.ellipsoid_ratio * nrm[1] - t * s.dy);
                grad[i][5] += common * (nrm[2] - t * s.dz);
                grad[i][6] += w * s.cosine;
                grad[i][7] += common * nrm[1] * s.dy;
                grad[i][8] += w * g * (-0.5 * std::log(s.r2));
            }
        }
    }

    const double norm = 1.0 / (3.0 * static_cast<double>(scene.albedo().pixel_count()));
    LossAndGradient out;
    out.loss = loss * norm;
    for (auto& p : grad) {
        for (double& v : p) v *= norm;
        LightGradient g;
        g.color = {p[0], p[1], p[2]};
        g.position = {p[3], p[4], p[5]};
        g.intensity = p[6];
        g.ellipsoid_ratio = p[7];
        g.diffuse_exponent = p[8];
        out.gradients.push_back(g);
    }
    return out;
}

}  // namespace relight::reference
