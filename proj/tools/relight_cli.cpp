// Command line front end: fit, render, transfer, lightpos, prompts, pipeline.
//
// Exit codes: 0 success, 1 I/O error, 2 validation/format error,
// 3 initialization error, 4 batch job finished with failed samples.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relight/errors.hpp"
#include "relight/fitter.hpp"
#include "relight/pipeline.hpp"
#include "relight/renderer.hpp"
#include "relight/scene_io.hpp"
#include "relight/transfer.hpp"

namespace {

using namespace relight;

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInit = 3;
constexpr int kExitPartial = 4;

struct MapPaths {
    std::string albedo, normal, depth;
};

void add_map_options(CLI::App* cmd, MapPaths& maps) {
    cmd->add_option("albedo", maps.albedo, "Albedo map (3-channel PFM)")->required();
    cmd->add_option("normal", maps.normal, "Normal map (3-channel PFM)")->required();
    cmd->add_option("depth", maps.depth, "Depth map (1-channel PFM, values in [0,1])")->required();
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    return out.parent_path() / (out.stem().string() + suffix);
}

int cmd_fit(const std::string& lighting_path, const MapPaths& maps, const FitConfig& config, const fs::path& out) {
    config.validate();
    const ImageF lighting = load_float_map(lighting_path);
    const SceneMaps scene = load_scene(maps.albedo, maps.normal, maps.depth);
    const LightingFit fit = fit_lights(lighting, scene, config);

    save_lights(fit.lights, out);
    save_preview_png(compose(scene.albedo(), shade_all(fit.lights, scene)), sibling(out, "_reconstruction.png"));
    write_file_atomic(sibling(out, "_telemetry.json"),
                      dump_json({{"final_error", fit.final_error},
                                 {"initial_error", fit.initial_error},
                                 {"iterations", fit.iterations_run},
                                 {"wall_time", fit.wall_time}}));
    std::cout << "fitted " << fit.lights.size() << " lights, final_error " << fit.final_error << " after "
              << fit.iterations_run << " iterations (" << fit.wall_time << " s)\n";
    return 0;
}

void write_image(const ImageF& img, const fs::path& out) {
    save_float_map(img, out);
    save_preview_png(img, sibling(out, ".png"));
}

int cmd_render(const std::string& lights_path, const MapPaths& maps, const fs::path& out) {
    const LightList lights = load_lights(lights_path);
    const SceneMaps scene = load_scene(maps.albedo, maps.normal, maps.depth);
    write_image(compose(scene.albedo(), shade_all(lights, scene)), out);
    return 0;
}

int cmd_transfer(const std::string& lights_path, const std::string& fit_depth_path, const MapPaths& maps,
                 const fs::path& out) {
    const LightList lights = load_lights(lights_path);
    const ImageF fit_depth = load_float_map(fit_depth_path);
    const SceneMaps scene = load_scene(maps.albedo, maps.normal, maps.depth);
    write_image(relight_background(lights, fit_depth, scene), out);
    return 0;
}

struct BatchOverrides {
    std::string config;
    std::string out;
    std::string vocab;
    std::optional<int> count;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_batch_options(CLI::App* cmd, BatchOverrides& o, bool config_required) {
    auto* opt = cmd->add_option("config", o.config, "Job configuration (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--out", o.out, "Output directory (overrides config)");
    cmd->add_option("--vocab", o.vocab, "Vocabulary JSON (overrides config)");
    cmd->add_option("--count", o.count, "Number of samples (overrides config)");
    cmd->add_option("--seed", o.seed, "Job seed (overrides config)");
    cmd->add_option("--threads", o.threads, "Worker threads (capped by RELIGHT_THREADS)");
}

int cmd_batch(JobKind kind, const BatchOverrides& o) {
    PipelineConfig cfg;
    if (!o.config.empty()) cfg = PipelineConfig::load(o.config);
    cfg.kind = kind;
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (!o.vocab.empty()) cfg.vocabulary = fs::absolute(o.vocab).string();
    if (o.count) cfg.count = *o.count;
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;

    const JobReport report = run_job(cfg);
    const auto emitted = report.manifest["samples"].size();
    std::cout << to_string(kind) << ": " << emitted << " samples written to " << cfg.output_dir.string();
    if (report.failed > 0) std::cout << ", " << report.failed << " failed";
    std::cout << "\n";
    return report.failed > 0 ? kExitPartial : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-light fitting, lighting transfer and relighting data synthesis"};
    app.require_subcommand(1);

    std::string lighting_path, lights_path, fit_depth_path, out;
    MapPaths maps;
    FitConfig fit_config;

    auto* fit = app.add_subcommand("fit", "Fit point lights to a lighting image");
    fit->add_option("lighting", lighting_path, "Lighting image (3-channel PFM)")->required();
    add_map_options(fit, maps);
    fit->add_option("--n", fit_config.n_lights, "Number of point lights");
    fit->add_option("--iters", fit_config.max_iters, "Maximum optimizer steps");
    fit->add_option("--lr", fit_config.learning_rate, "Adam learning rate");
    fit->add_option("--quantile", fit_config.intensity_quantile, "Seed-pixel intensity quantile");
    fit->add_option("--tol", fit_config.convergence_tol, "Relative loss decrease for early stopping (0 disables)");
    fit->add_option("--lift", fit_config.init_depth_offset, "Initial light height above the surface");
    fit->add_option("--seed", fit_config.seed, "Seed recorded with the fit");
    fit->add_option("--out", out, "Output lights JSON")->required();

    auto* render = app.add_subcommand("render", "Render albedo * shading under a light file");
    render->add_option("lights", lights_path, "Lights JSON")->required();
    add_map_options(render, maps);
    render->add_option("--out", out, "Output PFM (a PNG preview is written alongside)")->required();

    auto* transfer = app.add_subcommand("transfer", "Relight a target scene with fitted lights");
    transfer->add_option("lights", lights_path, "Lights JSON")->required();
    transfer->add_option("fit_depth", fit_depth_path, "Depth map of the fitted lighting image")->required();
    add_map_options(transfer, maps);
    transfer->add_option("--out", out, "Output PFM (a PNG preview is written alongside)")->required();

    BatchOverrides lightpos_opts, prompts_opts, pipeline_opts;
    auto* lightpos = app.add_subcommand("lightpos", "Synthesize light-positioning samples");
    add_batch_options(lightpos, lightpos_opts, true);
    auto* prompts = app.add_subcommand("prompts", "Generate lighting prompt constraints");
    add_batch_options(prompts, prompts_opts, false);
    auto* pipeline = app.add_subcommand("pipeline", "Run the full background relighting data flow");
    add_batch_options(pipeline, pipeline_opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*fit) return cmd_fit(lighting_path, maps, fit_config, out);
        if (*render) return cmd_render(lights_path, maps, out);
        if (*transfer) return cmd_transfer(lights_path, fit_depth_path, maps, out);
        if (*lightpos) return cmd_batch(JobKind::lightpos, lightpos_opts);
        if (*prompts) return cmd_batch(JobKind::prompts, prompts_opts);
        if (*pipeline) return cmd_batch(JobKind::pipeline, pipeline_opts);
    } catch (const InitError& e) {
        std::cerr << "initialization error: " << e.what() << "\n";
        return kExitInit;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
