#include "relight/pipeline.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <openssl/evp.h>

#include "relight/errors.hpp"
#include "relight/lightpos.hpp"
#include "relight/prompt_gen.hpp"
#include "relight/renderer.hpp"
#include "relight/rng.hpp"
#include "relight/scene_io.hpp"
#include "relight/transfer.hpp"

namespace relight {

namespace {

constexpr std::uint64_t kPickStream = 1;
constexpr std::uint64_t kPromptStream = 2;
constexpr std::uint64_t kLightposStream = 0x1000000;

using json = nlohmann::json;

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::string path_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_string() || obj.at(key).get<std::string>().empty()) {
        throw ValidationError(std::string("config entry missing path '") + key + "'");
    }
    return obj.at(key).get<std::string>();
}

std::string sample_id(const char* prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04d", prefix, index);
    return buf;
}

/// A loaded scene entry, or the reason it could not be loaded.
struct LoadedScene {
    std::optional<SceneMaps> maps;
    ImageF source;  // composite of foreground over background
    ImageF foreground;
    ImageF mask;
    std::string error;
};

LoadedScene load_scene_entry(const PipelineConfig& cfg, const SceneInput& in) {
    LoadedScene out;
    try {
        out.maps.emplace(load_scene(cfg.resolve(in.albedo), cfg.resolve(in.normal), cfg.resolve(in.depth)));
        out.foreground = load_float_map(cfg.resolve(in.foreground));
        out.mask = load_float_map(cfg.resolve(in.mask));
        const ImageF background = load_float_map(cfg.resolve(in.background));
        require_channels(out.foreground, 3, "foreground");
        require_same_size(out.foreground, out.maps->albedo(), "foreground/scene maps");
        out.source = composite_mask(out.foreground, background, out.mask);
    } catch (const Error& e) {
        out.maps.reset();
        out.error = e.what();
    }
    return out;
}

json scene_inputs(const SceneInput& in) {
    return {{"foreground", in.foreground}, {"mask", in.mask},     {"background", in.background},
            {"albedo", in.albedo},         {"normal", in.normal}, {"depth", in.depth}};
}

json lighting_inputs(const LightingInput& in) {
    return {{"image", in.image}, {"albedo", in.albedo}, {"normal", in.normal}, {"depth", in.depth}};
}

/// Writes named outputs under `dir` and records their relative paths and hashes.
class OutputRecorder {
public:
    explicit OutputRecorder(const fs::path& dir) : dir_(dir) {}

    void float_map(const std::string& name, const std::string& rel, const ImageF& img) {
        save_float_map(img, dir_ / rel);
        record(name, rel);
    }
    void preview(const std::string& name, const std::string& rel, const ImageF& img) {
        save_preview_png(img, dir_ / rel);
        record(name, rel);
    }
    void text(const std::string& name, const std::string& rel, const std::string& body) {
        write_file_atomic(dir_ / rel, body);
        record(name, rel);
    }

    json outputs;
    json hashes = json::object();

private:
    void record(const std::string& name, const std::string& rel) {
        outputs[name] = rel;
        hashes[name] = sha256_file(dir_ / rel);
    }

    fs::path dir_;
};

/// Runs `body(i)` for i in [0, count) over a worker pool and collects the
/// per-sample manifest entries in index order.
template <typename Body>
JobReport run_samples(const PipelineConfig& cfg, int count, const char* prefix, Body body) {
    std::vector<std::optional<json>> entries(count);
    std::vector<std::string> errors(count);
    const int threads = effective_threads(cfg.threads);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < count; ++i) {
        try {
            entries[i] = body(i);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }

    JobReport report;
    report.manifest = {{"job", to_string(cfg.kind)}, {"seed", cfg.seed}, {"samples", json::array()},
                       {"failed", json::array()}};
    for (int i = 0; i < count; ++i) {
        if (entries[i]) {
            report.manifest["samples"].push_back(std::move(*entries[i]));
        } else {
            std::cerr << "sample " << sample_id(prefix, i) << " failed: " << errors[i] << "\n";
            report.manifest["failed"].push_back({{"id", sample_id(prefix, i)}, {"error", errors[i]}});
            ++report.failed;
        }
    }
    return report;
}

Vocabulary config_vocabulary(const PipelineConfig& cfg) {
    return load_vocabulary(cfg.vocabulary.empty() ? default_vocabulary_path() : cfg.resolve(cfg.vocabulary));
}

void write_manifest(const PipelineConfig& cfg, JobReport& report) {
    write_file_atomic(cfg.output_dir / "manifest.json", dump_json(report.manifest));
}

/// Light-positioning samples drawn over the configured scenes.
JobReport positioning_samples(const PipelineConfig& cfg, const Vocabulary& vocab,
                              const std::vector<LoadedScene>& scenes, int count) {
    fs::create_directories(cfg.output_dir / "lightpos");
    return run_samples(cfg, count, "lightpos", [&](int i) {
        const std::uint64_t seed = mix_seed(cfg.seed, kLightposStream + static_cast<std::uint64_t>(i));
        Rng pick(mix_seed(seed, kPickStream));
        const auto scene_index = static_cast<std::size_t>(pick.below(scenes.size()));
        const LoadedScene& scene = scenes[scene_index];
        if (!scene.maps) throw ValidationError("scene " + std::to_string(scene_index) + ": " + scene.error);

        const PositioningSample sample = synthesize_edit_sequence(scene.source, *scene.maps, vocab.positioning, seed);
        const std::string id = sample_id("lightpos", i);
        OutputRecorder out(cfg.output_dir);
        out.float_map("source", "lightpos/" + id + "_source.pfm", scene.source);
        out.float_map("edited", "lightpos/" + id + "_edited.pfm", sample.edited_image);
        out.preview("edited_preview", "lightpos/" + id + "_edited.png", sample.edited_image);
        out.text("sidecar", "lightpos/" + id + ".json", dump_json(sample_sidecar(sample)));
        return json{{"id", id},
                    {"seed", seed},
                    {"inputs", {{"scene", scene_inputs(cfg.scenes[scene_index])}}},
                    {"outputs", out.outputs},
                    {"sha256", out.hashes}};
    });
}

}  // namespace

std::string_view to_string(JobKind kind) {
    switch (kind) {
        case JobKind::fit: return "fit";
        case JobKind::render: return "render";
        case JobKind::transfer: return "transfer";
        case JobKind::lightpos: return "lightpos";
        case JobKind::prompts: return "prompts";
        case JobKind::pipeline: return "pipeline";
    }
    return "pipeline";
}

JobKind parse_job_kind(std::string_view text) {
    for (JobKind k : {JobKind::fit, JobKind::render, JobKind::transfer, JobKind::lightpos, JobKind::prompts,
                      JobKind::pipeline}) {
        if (to_string(k) == text) return k;
    }
    throw ValidationError("unknown job kind '" + std::string(text) + "'");
}

PipelineConfig PipelineConfig::from_json(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    try {
        if (doc.contains("job")) cfg.kind = parse_job_kind(doc.at("job").get<std::string>());
        if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
        read_opt(doc, "vocabulary", cfg.vocabulary);
        read_opt(doc, "count", cfg.count);
        read_opt(doc, "lightpos_count", cfg.lightpos_count);
        read_opt(doc, "seed", cfg.seed);
        read_opt(doc, "threads", cfg.threads);
        if (doc.contains("fit")) {
            const json& f = doc.at("fit");
            read_opt(f, "n_lights", cfg.fit.n_lights);
            read_opt(f, "max_iters", cfg.fit.max_iters);
            read_opt(f, "learning_rate", cfg.fit.learning_rate);
            read_opt(f, "intensity_quantile", cfg.fit.intensity_quantile);
            read_opt(f, "convergence_tol", cfg.fit.convergence_tol);
            read_opt(f, "convergence_window", cfg.fit.convergence_window);
            read_opt(f, "init_depth_offset", cfg.fit.init_depth_offset);
            read_opt(f, "seed", cfg.fit.seed);
        }
        for (const json& e : doc.value("lighting", json::array())) {
            cfg.lighting.push_back({path_field(e, "image"), path_field(e, "albedo"), path_field(e, "normal"),
                                    path_field(e, "depth")});
        }
        for (const json& e : doc.value("scenes", json::array())) {
            cfg.scenes.push_back({path_field(e, "foreground"), path_field(e, "mask"), path_field(e, "background"),
                                  path_field(e, "albedo"), path_field(e, "normal"), path_field(e, "depth")});
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
    PipelineConfig cfg = from_json(doc, path.parent_path());
    if (!cfg.output_dir.empty() && cfg.output_dir.is_relative()) cfg.output_dir = cfg.base_dir / cfg.output_dir;
    return cfg;
}

fs::path PipelineConfig::resolve(const std::string& path) const {
    const fs::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void PipelineConfig::validate() const {
    if (output_dir.empty()) throw ValidationError("config needs an output_dir");
    if (count < 1) throw ValidationError("count must be positive");
    if (lightpos_count < 0) throw ValidationError("lightpos_count must be nonnegative");
    if (threads < 1) throw ValidationError("threads must be positive");
    fit.validate();
    const bool needs_scenes = kind == JobKind::lightpos || kind == JobKind::pipeline;
    if (needs_scenes && scenes.empty()) throw ValidationError("config lists no scenes");
    if (kind == JobKind::pipeline && lighting.empty()) throw ValidationError("config lists no lighting images");
}

int effective_threads(int requested) {
    int threads = std::max(requested, 1);
    if (const char* env = std::getenv("RELIGHT_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) threads = std::min<long>(threads, cap);
    }
    return threads;
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr)) {
        throw Error("sha256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

JobReport run_prompts_job(const PipelineConfig& cfg) {
    cfg.validate();
    const Vocabulary vocab = config_vocabulary(cfg);
    fs::create_directories(cfg.output_dir);

    std::vector<std::string> lines(cfg.count);
    JobReport report = run_samples(cfg, cfg.count, "prompt", [&](int i) {
        const std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
        json record = constraint_to_json(sample_constraint(vocab.hierarchy, seed));
        record["id"] = sample_id("prompt", i);
        record["seed"] = seed;
        lines[i] = record.dump();
        return json{{"id", sample_id("prompt", i)},
                    {"seed", seed},
                    {"inputs", {{"vocabulary", cfg.vocabulary}}},
                    {"outputs", {{"record", "prompts.jsonl#" + std::to_string(i + 1)}}},
                    {"sha256", {{"record", sha256_hex(lines[i])}}}};
    });
    std::string body;
    for (const std::string& line : lines) {
        if (!line.empty()) body += line + "\n";
    }
    write_file_atomic(cfg.output_dir / "prompts.jsonl", body);
    write_manifest(cfg, report);
    return report;
}

JobReport run_lightpos_job(const PipelineConfig& cfg) {
    cfg.validate();
    const Vocabulary vocab = config_vocabulary(cfg);
    std::vector<LoadedScene> scenes;
    for (const SceneInput& in : cfg.scenes) scenes.push_back(load_scene_entry(cfg, in));
    fs::create_directories(cfg.output_dir);
    JobReport report = positioning_samples(cfg, vocab, scenes, cfg.count);
    write_manifest(cfg, report);
    return report;
}

JobReport run_pipeline_job(const PipelineConfig& cfg) {
    cfg.validate();
    const Vocabulary vocab = config_vocabulary(cfg);
    std::vector<LoadedScene> scenes;
    for (const SceneInput& in : cfg.scenes) scenes.push_back(load_scene_entry(cfg, in));
    fs::create_directories(cfg.output_dir / "fits");

    // Fit every lighting image once; samples reuse the fitted lights.
    struct FitSlot {
        std::optional<LightingFit> fit;
        ImageF depth;
        std::string error;
    };
    std::vector<FitSlot> fits(cfg.lighting.size());
    JobReport fit_report = run_samples(cfg, static_cast<int>(cfg.lighting.size()), "lighting", [&](int i) {
        const LightingInput& in = cfg.lighting[i];
        try {
            const ImageF image = load_float_map(cfg.resolve(in.image));
            const SceneMaps maps = load_scene(cfg.resolve(in.albedo), cfg.resolve(in.normal), cfg.resolve(in.depth));
            fits[i].fit = fit_lights(image, maps, cfg.fit);
            fits[i].depth = maps.depth();

            const std::string id = sample_id("lighting", i);
            OutputRecorder out(cfg.output_dir);
            out.text("lights", "fits/" + id + "_lights.json", dump_json(lights_to_json(fits[i].fit->lights)));
            out.preview("reconstruction", "fits/" + id + "_reconstruction.png",
                        compose(maps.albedo(), shade_all(fits[i].fit->lights, maps)));
            // Telemetry holds wall time, so it is written but not hashed.
            write_file_atomic(cfg.output_dir / "fits" / (id + "_telemetry.json"),
                              dump_json({{"final_error", fits[i].fit->final_error},
                                         {"initial_error", fits[i].fit->initial_error},
                                         {"iterations", fits[i].fit->iterations_run},
                                         {"wall_time", fits[i].fit->wall_time}}));
            return json{{"id", id},
                        {"seed", cfg.fit.seed},
                        {"inputs", lighting_inputs(in)},
                        {"outputs", out.outputs},
                        {"sha256", out.hashes}};
        } catch (const std::exception& e) {
            fits[i].fit.reset();
            fits[i].error = e.what();
            throw;
        }
    });

    fs::create_directories(cfg.output_dir / "samples");
    JobReport report = run_samples(cfg, cfg.count, "sample", [&](int i) {
        const std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
        Rng pick(mix_seed(seed, kPickStream));
        const auto li = static_cast<std::size_t>(pick.below(cfg.lighting.size()));
        const auto si = static_cast<std::size_t>(pick.below(cfg.scenes.size()));
        const FitSlot& fit = fits[li];
        const LoadedScene& scene = scenes[si];
        if (!fit.fit) throw ValidationError("lighting " + std::to_string(li) + " has no fit: " + fit.error);
        if (!scene.maps) throw ValidationError("scene " + std::to_string(si) + ": " + scene.error);

        const Constraint constraint = sample_constraint(vocab.hierarchy, mix_seed(seed, kPromptStream));
        const ImageF relit = relight_background(fit.fit->lights, fit.depth, *scene.maps);
        const ImageF target = composite_mask(scene.foreground, relit, scene.mask);

        const std::string id = sample_id("sample", i);
        const std::string dir = "samples/" + id;
        fs::create_directories(cfg.output_dir / dir);
        OutputRecorder out(cfg.output_dir);
        out.float_map("source", dir + "/source.pfm", scene.source);
        out.float_map("target", dir + "/target.pfm", target);
        out.preview("source_preview", dir + "/source.png", scene.source);
        out.preview("target_preview", dir + "/target.png", target);
        out.text("text", dir + "/text.txt", constraint.question + "\n");
        out.text("sidecar", dir + "/sample.json",
                 dump_json({{"text", constraint.question},
                            {"constraint", constraint_to_json(constraint)},
                            {"lighting", li},
                            {"scene", si},
                            {"seed", seed}}));
        return json{{"id", id},
                    {"seed", seed},
                    {"inputs", {{"lighting", lighting_inputs(cfg.lighting[li])}, {"scene", scene_inputs(cfg.scenes[si])}}},
                    {"outputs", out.outputs},
                    {"sha256", out.hashes}};
    });
    report.manifest["fits"] = fit_report.manifest["samples"];
    for (auto& f : fit_report.manifest["failed"]) report.manifest["failed"].push_back(f);
    report.failed += fit_report.failed;

    if (cfg.lightpos_count > 0) {
        JobReport lp = positioning_samples(cfg, vocab, scenes, cfg.lightpos_count);
        report.manifest["lightpos"] = lp.manifest["samples"];
        for (auto& f : lp.manifest["failed"]) report.manifest["failed"].push_back(f);
        report.failed += lp.failed;
    }
    write_manifest(cfg, report);
    return report;
}

JobReport run_job(const PipelineConfig& cfg) {
    switch (cfg.kind) {
        case JobKind::prompts: return run_prompts_job(cfg);
        case JobKind::lightpos: return run_lightpos_job(cfg);
        case JobKind::pipeline: return run_pipeline_job(cfg);
        default: throw ValidationError("job '" + std::string(to_string(cfg.kind)) + "' is not a batch job");
    }
}

}  // namespace relight
