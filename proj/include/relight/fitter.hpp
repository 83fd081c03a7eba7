#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "relight/image.hpp"
#include "relight/light.hpp"

namespace relight {

struct FitConfig {
    int n_lights = 20;
    int max_iters = 2000;
    double learning_rate = 5e-2;
    /// Pixels whose grayscale exceeds this quantile seed the initial lights.
    double intensity_quantile = 0.7;
    /// Stop when the relative loss decrease over `convergence_window` steps
    /// falls below this value. Zero disables early stopping.
    double convergence_tol = 1e-4;
    int convergence_window = 50;
    /// Initial light height above the surface sampled under it. A light that
    /// starts exactly on a flat surface sees N.l = 0 at every pixel and gets
    /// no gradient, so fitting lifts the seeds by this amount.
    double init_depth_offset = 0.1;
    std::uint64_t seed = 0;

    /// Throws ValidationError on non-positive counts or out-of-range values.
    void validate() const;
};

struct LightingFit {
    LightList lights;
    double final_error = 0.0;    // mean squared photometric error of `lights`
    double initial_error = 0.0;  // same, at the initialization
    int iterations_run = 0;
    double wall_time = 0.0;      // seconds
};

/// Gradient of the loss with respect to one light's parameters.
struct LightGradient {
    Vec3 color{};
    Vec3 position{};
    double intensity = 0.0;
    double ellipsoid_ratio = 0.0;
    double diffuse_exponent = 0.0;
};

inline constexpr int kParamsPerLight = 9;
using LightParams = std::array<double, kParamsPerLight>;

/// Flat parameter order: color rgb, position xyz, intensity, ratio, exponent.
LightParams pack(const PointLight& light);
LightParams pack(const LightGradient& grad);
PointLight unpack_light(const LightParams& p);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<LightGradient> gradients;
};

/// Seeds `config.n_lights` lights at bright pixels spread by farthest-point
/// sampling. Color (0.5,0.5,0.5), intensity 1/n, ratio 1, exponent 1,
/// z = depth under the pixel + config.init_depth_offset (clamped to [0,1]).
LightList init_lights(const ImageF& lighting_image, const ImageF& depth, const FitConfig& config);

/// Mean over pixels and channels of (target - albedo * sum of shading)^2.
double fit_loss(std::span<const PointLight> lights, const SceneMaps& scene, const ImageF& target);

/// Analytic gradient of fit_loss. Pixels on the clamp boundary contribute a
/// zero subgradient to position, intensity, ratio and exponent.
std::vector<LightGradient> fit_loss_grad(std::span<const PointLight> lights, const SceneMaps& scene,
                                         const ImageF& target);

/// Loss and gradient from one pass over the image. Rows run in parallel; the
/// per-row partial sums are reduced in row order, so results are identical
/// for any thread count.
LossAndGradient fit_loss_and_grad(std::span<const PointLight> lights, const SceneMaps& scene,
                                  const ImageF& target);

/// Clamps every parameter into its valid range.
void project_to_bounds(PointLight& light);

/// Initializes and refines lights with Adam, returning the best iterate seen.
LightingFit fit_lights(const ImageF& lighting_image, const SceneMaps& scene, const FitConfig& config);

/// Adam refinement from given starting lights.
LightingFit refine_lights(LightList lights, const ImageF& lighting_image, const SceneMaps& scene,
                          const FitConfig& config);

}  // namespace relight
