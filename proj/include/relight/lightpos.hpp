#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "relight/grid_edit.hpp"
#include "relight/image.hpp"
#include "relight/prompt_gen.hpp"

namespace relight {

inline constexpr int kMaxEdits = 3;

/// Sampling ranges for added lights.
inline constexpr double kMinLightLift = 0.1;
inline constexpr double kMaxLightLift = 0.5;
inline constexpr double kMinEditIntensity = 0.2;
inline constexpr double kMaxEditIntensity = 1.0;

struct PositioningSample {
    std::vector<GridLightEdit> edits;
    ImageF edited_image;
    std::string text;
    std::uint64_t seed = 0;
};

/// Lights still present after replaying `edits` in order.
LightList active_lights(std::span<const GridLightEdit> edits);

/// source + albedo * shading of the lights left active by `edits`.
ImageF render_edits(const ImageF& source, const SceneMaps& scene,
                    std::span<const GridLightEdit> edits);

/// Samples one to three add/remove/move edits, renders them over `source`
/// and writes the matching instruction text.
PositioningSample synthesize_edit_sequence(const ImageF& source, const SceneMaps& scene,
                                           const PositioningVocab& vocab, std::uint64_t seed);

nlohmann::json edit_to_json(const GridLightEdit& edit);
nlohmann::json sample_sidecar(const PositioningSample& sample);

}  // namespace relight
