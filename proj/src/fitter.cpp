#include "relight/fitter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "relight/errors.hpp"
#include "relight/renderer.hpp"

namespace relight {

namespace {

constexpr double kMinShapeParam = 1e-3;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void require_fit_inputs(std::span<const PointLight> lights, const SceneMaps& scene, const ImageF& target) {
    require_channels(target, 3, "fit target");
    require_same_size(scene.albedo(), target, "fit target/scene");
    for (const PointLight& l : lights) validate_light(l);
}

/// Loss and (optionally) gradient contributions of one image row, unnormalized.
/// `grad` holds one LightParams per light and is accumulated into.
double loss_grad_row(std::span<const PointLight> lights, const SceneMaps& scene, const ImageF& target, int row,
                     std::span<LightParams> grad) {
    const int width = scene.width();
    const std::size_t n = lights.size();
    const double y = pixel_center(row, scene.height());
    const auto albedo = scene.albedo().row(row);
    const auto normals = scene.normal().row(row);
    const auto depth = scene.depth().row(row);
    const auto tgt = target.row(row);
    const bool want_grad = !grad.empty();

    double loss = 0.0;
    for (int col = 0; col < width; ++col) {
        const double x = pixel_center(col, width);
        const double* nrm = &normals[3 * col];
        const double* a = &albedo[3 * col];

        double shade[3] = {0.0, 0.0, 0.0};
        for (const PointLight& l : lights) {
            const double g = light_response(l, x, y, depth[col], nrm);
            shade[0] += l.color[0] * g;
            shade[1] += l.color[1] * g;
            shade[2] += l.color[2] * g;
        }
        double resid[3];
        for (int c = 0; c < 3; ++c) {
            resid[c] = a[c] * shade[c] - tgt[3 * col + c];
            loss += resid[c] * resid[c];
        }
        if (!want_grad) continue;

        // d(loss)/d(rendered) per channel, before the 1/(3P) normalization.
        const double e[3] = {2.0 * resid[0] * a[0], 2.0 * resid[1] * a[1], 2.0 * resid[2] * a[2]};
        for (std::size_t i = 0; i < n; ++i) {
            const PointLight& l = lights[i];
            const LightSample s = sample_light(l, x, y, depth[col], nrm);
            const bool lit = !s.singular && s.cosine > 0.0;
            const double resp = lit ? l.intensity * s.cosine : 0.0;
            LightParams& gi = grad[i];
            gi[0] += e[0] * resp;
            gi[1] += e[1] * resp;
            gi[2] += e[2] * resp;
            if (!lit) continue;  // zero subgradient on the clamp

            const double w = e[0] * l.color[0] + e[1] * l.color[1] + e[2] * l.color[2];
            const double common = w * l.intensity * s.falloff;
            const double t = l.diffuse_exponent * s.n_dot_v / s.r2;
            gi[3] += common * (nrm[0] - t * s.dx);
            gi[4] += common * (l.ellipsoid_ratio * nrm[1] - t * s.dy);
            gi[5] += common * (nrm[2] - t * s.dz);
            gi[6] += w * s.cosine;
            gi[7] += common * nrm[1] * s.dy;
            gi[8] += w * resp * (-0.5 * std::log(s.r2));
        }
    }
    return loss;
}

LossAndGradient evaluate(std::span<const PointLight> lights, const SceneMaps& scene, const ImageF& target,
                         bool want_grad) {
    require_fit_inputs(lights, scene, target);
    const int height = scene.height();
    const std::size_t n = lights.size();
    const std::size_t grad_stride = want_grad ? n : 0;

    std::vector<double> row_loss(height, 0.0);
    std::vector<LightParams> row_grad(grad_stride * height, LightParams{});

#pragma omp parallel for schedule(static)
    for (int row = 0; row < height; ++row) {
        std::span<LightParams> g(row_grad.data() + grad_stride * row, grad_stride);
        row_loss[row] = loss_grad_row(lights, scene, target, row, g);
    }

    const double norm = 1.0 / (3.0 * static_cast<double>(scene.albedo().pixel_count()));
    LossAndGradient out;
    double loss = 0.0;
    for (double l : row_loss) loss += l;
    out.loss = loss * norm;
    if (want_grad) {
        std::vector<LightParams> total(n, LightParams{});
        for (int row = 0; row < height; ++row) {
            for (std::size_t i = 0; i < n; ++i) {
                for (int k = 0; k < kParamsPerLight; ++k) total[i][k] += row_grad[row * n + i][k];
            }
        }
        out.gradients.reserve(n);
        for (auto& p : total) {
            for (double& v : p) v *= norm;
            LightGradient g;
            g.color = {p[0], p[1], p[2]};
            g.position = {p[3], p[4], p[5]};
            g.intensity = p[6];
            g.ellipsoid_ratio = p[7];
            g.diffuse_exponent = p[8];
            out.gradients.push_back(g);
        }
    }
    return out;
}

}  // namespace

void FitConfig::validate() const {
    if (n_lights < 1) throw ValidationError("n_lights must be positive");
    if (max_iters < 1) throw ValidationError("max_iters must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be positive");
    if (!(intensity_quantile > 0.0 && intensity_quantile < 1.0)) {
        throw ValidationError("intensity_quantile must lie in (0,1)");
    }
    if (!(convergence_tol >= 0.0) || !std::isfinite(convergence_tol)) {
        throw ValidationError("convergence_tol must be nonnegative");
    }
    if (convergence_window < 1) throw ValidationError("convergence_window must be positive");
    if (!(init_depth_offset >= 0.0 && init_depth_offset <= 1.0)) {
        throw ValidationError("init_depth_offset must lie in [0,1]");
    }
}

LightParams pack(const PointLight& l) {
    return {l.color[0],    l.color[1],    l.color[2], l.position[0], l.position[1], l.position[2],
            l.intensity, l.ellipsoid_ratio, l.diffuse_exponent};
}

LightParams pack(const LightGradient& g) {
    return {g.color[0],    g.color[1],    g.color[2], g.position[0], g.position[1], g.position[2],
            g.intensity, g.ellipsoid_ratio, g.diffuse_exponent};
}

PointLight unpack_light(const LightParams& p) {
    PointLight l;
    l.color = {p[0], p[1], p[2]};
    l.position = {p[3], p[4], p[5]};
    l.intensity = p[6];
    l.ellipsoid_ratio = p[7];
    l.diffuse_exponent = p[8];
    return l;
}

LightList init_lights(const ImageF& lighting_image, const ImageF& depth, const FitConfig& config) {
    config.validate();
    require_channels(lighting_image, 3, "lighting image");
    require_channels(depth, 1, "depth");
    require_same_size(lighting_image, depth, "lighting image/depth");
    if (lighting_image.empty()) throw ValidationError("lighting image is empty");

    const int width = lighting_image.width();
    const std::size_t pixels = lighting_image.pixel_count();
    std::vector<double> gray(pixels);
    const auto data = lighting_image.data();
    for (std::size_t p = 0; p < pixels; ++p) gray[p] = (data[3 * p] + data[3 * p + 1] + data[3 * p + 2]) / 3.0;

    std::vector<double> sorted = gray;
    const auto q_index = static_cast<std::size_t>(std::floor(config.intensity_quantile * (pixels - 1)));
    std::nth_element(sorted.begin(), sorted.begin() + q_index, sorted.end());
    const double threshold = sorted[q_index];

    std::vector<std::size_t> candidates;
    for (std::size_t p = 0; p < pixels; ++p) {
        if (gray[p] > threshold) candidates.push_back(p);
    }
    const auto n = static_cast<std::size_t>(config.n_lights);
    if (candidates.size() < n) {
        throw InitError("only " + std::to_string(candidates.size()) + " pixels exceed the intensity threshold, need " +
                        std::to_string(n));
    }

    // Farthest-point sampling in pixel units; ties go to the smallest
    // row-major index because only strictly better candidates replace.
    std::size_t pick = 0;
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        if (gray[candidates[k]] > gray[candidates[pick]]) pick = k;
    }
    std::vector<std::int64_t> min_d2(candidates.size(), std::numeric_limits<std::int64_t>::max());
    std::vector<std::size_t> picks;
    picks.reserve(n);
    while (true) {
        picks.push_back(candidates[pick]);
        if (picks.size() == n) break;
        const auto pr = static_cast<std::int64_t>(candidates[pick] / width);
        const auto pc = static_cast<std::int64_t>(candidates[pick] % width);
        std::size_t best = 0;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const auto dr = static_cast<std::int64_t>(candidates[k] / width) - pr;
            const auto dc = static_cast<std::int64_t>(candidates[k] % width) - pc;
            min_d2[k] = std::min(min_d2[k], dr * dr + dc * dc);
            if (min_d2[k] > min_d2[best]) best = k;
        }
        pick = best;
    }

    LightList lights;
    lights.reserve(n);
    for (std::size_t p : picks) {
        const int row = static_cast<int>(p / width);
        const int col = static_cast<int>(p % width);
        PointLight l;
        l.color = {0.5, 0.5, 0.5};
        l.position = {pixel_center(col, width), pixel_center(row, lighting_image.height()),
                      std::clamp(depth.at(row, col) + config.init_depth_offset, 0.0, 1.0)};
        l.intensity = 1.0 / static_cast<double>(n);
        l.ellipsoid_ratio = 1.0;
        l.diffuse_exponent = 1.0;
        lights.push_back(l);
    }
    return lights;
}

double fit_loss(std::span<const PointLight> lights, const SceneMaps& scene, const ImageF& target) {
    return evaluate(lights, scene, target, false).loss;
}

std::vector<LightGradient> fit_loss_grad(std::span<const PointLight> lights, const SceneMaps& scene,
                                         const ImageF& target) {
    return evaluate(lights, scene, target, true).gradients;
}

LossAndGradient fit_loss_and_grad(std::span<const PointLight> lights, const SceneMaps& scene,
                                  const ImageF& target) {
    return evaluate(lights, scene, target, true);
}

void project_to_bounds(PointLight& l) {
    for (double& c : l.color) c = std::clamp(c, 0.0, 1.0);
    for (double& p : l.position) p = std::clamp(p, 0.0, 1.0);
    l.intensity = std::max(l.intensity, 0.0);
    l.ellipsoid_ratio = std::max(l.ellipsoid_ratio, kMinShapeParam);
    l.diffuse_exponent = std::max(l.diffuse_exponent, kMinShapeParam);
}

LightingFit refine_lights(LightList lights, const ImageF& lighting_image, const SceneMaps& scene,
                          const FitConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = lights.size();
    std::vector<LightParams> m(n, LightParams{}), v(n, LightParams{});
    std::vector<double> history;
    history.reserve(config.max_iters);

    LightingFit fit;
    fit.lights = lights;
    fit.final_error = std::numeric_limits<double>::infinity();
    double beta1_t = 1.0, beta2_t = 1.0;
    bool stopped_early = false;

    for (int iter = 0; iter < config.max_iters; ++iter) {
        const LossAndGradient lg = fit_loss_and_grad(lights, scene, lighting_image);
        if (iter == 0) fit.initial_error = lg.loss;
        if (lg.loss < fit.final_error) {
            fit.final_error = lg.loss;
            fit.lights = lights;
        }
        history.push_back(lg.loss);
        if (lg.loss == 0.0) {
            stopped_early = true;
            break;
        }
        if (config.convergence_tol > 0.0 && iter >= config.convergence_window) {
            const double before = history[iter - config.convergence_window];
            if ((before - lg.loss) / before < config.convergence_tol) {
                stopped_early = true;
                break;
            }
        }

        beta1_t *= kAdamBeta1;
        beta2_t *= kAdamBeta2;
        for (std::size_t i = 0; i < n; ++i) {
            LightParams p = pack(lights[i]);
            const LightParams g = pack(lg.gradients[i]);
            for (int k = 0; k < kParamsPerLight; ++k) {
                m[i][k] = kAdamBeta1 * m[i][k] + (1.0 - kAdamBeta1) * g[k];
                v[i][k] = kAdamBeta2 * v[i][k] + (1.0 - kAdamBeta2) * g[k] * g[k];
                const double m_hat = m[i][k] / (1.0 - beta1_t);
                const double v_hat = v[i][k] / (1.0 - beta2_t);
                p[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
            }
            lights[i] = unpack_light(p);
            project_to_bounds(lights[i]);
        }
        fit.iterations_run = iter + 1;
    }
    if (!stopped_early) {
        const double last = fit_loss(lights, scene, lighting_image);
        if (last < fit.final_error) {
            fit.final_error = last;
            fit.lights = lights;
        }
    }
    fit.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return fit;
}

LightingFit fit_lights(const ImageF& lighting_image, const SceneMaps& scene, const FitConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    require_same_size(lighting_image, scene.depth(), "lighting image/scene");
    LightingFit fit = refine_lights(init_lights(lighting_image, scene.depth(), config), lighting_image, scene, config);
    fit.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return fit;
}

}  // namespace relight
