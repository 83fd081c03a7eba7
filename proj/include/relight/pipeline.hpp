#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relight/fitter.hpp"

namespace relight {

namespace fs = std::filesystem;

enum class JobKind { fit, render, transfer, lightpos, prompts, pipeline };

std::string_view to_string(JobKind kind);
JobKind parse_job_kind(std::string_view text);

/// A lighting image together with the intrinsic maps detected from it.
struct LightingInput {
    std::string image;
    std::string albedo;
    std::string normal;
    std::string depth;
};

/// A portrait scene: foreground layer, mask, background and the background's
/// intrinsic maps.
struct SceneInput {
    std::string foreground;
    std::string mask;
    std::string background;
    std::string albedo;
    std::string normal;
    std::string depth;
};

/// Batch job description. Relative paths resolve against `base_dir`, but are
/// recorded in manifests exactly as written.
struct PipelineConfig {
    JobKind kind = JobKind::pipeline;
    fs::path base_dir;
    fs::path output_dir;
    std::string vocabulary;  // empty: shipped vocabulary
    FitConfig fit;
    int count = 1;
    int lightpos_count = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<LightingInput> lighting;
    std::vector<SceneInput> scenes;

    static PipelineConfig from_json(const nlohmann::json& doc, const fs::path& base_dir);
    static PipelineConfig load(const fs::path& path);

    fs::path resolve(const std::string& path) const;
    void validate() const;
};

struct JobReport {
    nlohmann::json manifest;
    int failed = 0;
};

/// Requested parallelism capped by the RELIGHT_THREADS environment variable.
int effective_threads(int requested);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// Each job writes its outputs and `manifest.json` under config.output_dir.
/// Failed samples are logged to stderr and listed under "failed".
JobReport run_prompts_job(const PipelineConfig& config);
JobReport run_lightpos_job(const PipelineConfig& config);
JobReport run_pipeline_job(const PipelineConfig& config);
JobReport run_job(const PipelineConfig& config);

}  // namespace relight
