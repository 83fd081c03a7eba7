#include "relight/lightpos.hpp"

#include <algorithm>
#include <cmath>

#include "relight/errors.hpp"
#include "relight/renderer.hpp"
#include "relight/rng.hpp"
#include "relight/scene_io.hpp"

namespace relight {

namespace {

constexpr int kMaxActionRetries = 64;
constexpr std::uint64_t kTextStream = 0x7e47;

struct ActiveLight {
    int id = 0;
    PointLight light;
    std::string color_name;
    double lift = 0.0;
};

/// Uniform point inside `cell`, kept strictly below the upper bounds.
std::pair<double, double> sample_in_cell(Rng& rng, int cell) {
    auto axis = [&rng](int index) {
        const double lo = index / static_cast<double>(kGridSize);
        const double hi = (index + 1) / static_cast<double>(kGridSize);
        double v = rng.uniform(lo, hi);
        if (v >= hi) v = std::nextafter(hi, lo);
        return v;
    };
    const double x = axis(cell % kGridSize);
    const double y = axis(cell / kGridSize);
    return {x, y};
}

void place(PointLight& light, Rng& rng, int cell, double lift, const ImageF& depth) {
    const auto [x, y] = sample_in_cell(rng, cell);
    light.position = {x, y, std::clamp(sample_bilinear(depth, x, y) + lift, 0.0, 1.0)};
}

}  // namespace

LightList active_lights(std::span<const GridLightEdit> edits) {
    std::vector<std::pair<int, PointLight>> active;
    for (const GridLightEdit& e : edits) {
        auto it = std::find_if(active.begin(), active.end(), [&](const auto& a) { return a.first == e.light_id; });
        switch (e.action) {
            case EditAction::add:
                if (it != active.end()) throw ValidationError("edit adds light id twice");
                active.emplace_back(e.light_id, e.light);
                break;
            case EditAction::remove:
                if (it == active.end()) throw ValidationError("edit removes a light that is not present");
                active.erase(it);
                break;
            case EditAction::move:
                if (it == active.end()) throw ValidationError("edit moves a light that is not present");
                it->second = e.light;
                break;
        }
    }
    LightList lights;
    for (const auto& a : active) lights.push_back(a.second);
    return lights;
}

ImageF render_edits(const ImageF& source, const SceneMaps& scene, std::span<const GridLightEdit> edits) {
    require_channels(source, 3, "positioning source");
    require_same_size(source, scene.albedo(), "positioning source/scene");
    const LightList lights = active_lights(edits);
    if (lights.empty()) return source;

    const ImageF added = compose(scene.albedo(), shade_all(lights, scene));
    ImageF out = source;
    auto o = out.data();
    const auto a = added.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += a[i];
    return out;
}

PositioningSample synthesize_edit_sequence(const ImageF& source, const SceneMaps& scene,
                                           const PositioningVocab& vocab, std::uint64_t seed) {
    require_channels(source, 3, "positioning source");
    require_same_size(source, scene.albedo(), "positioning source/scene");
    vocab.validate();

    Rng rng(seed);
    PositioningSample sample;
    sample.seed = seed;
    const int edit_count = rng.between(1, kMaxEdits);
    std::vector<ActiveLight> active;
    int next_id = 0;

    for (int e = 0; e < edit_count; ++e) {
        // remove/move need a light to act on; redraw the action until one fits.
        EditAction action = EditAction::add;
        bool drawn = false;
        for (int attempt = 0; attempt < kMaxActionRetries && !drawn; ++attempt) {
            action = static_cast<EditAction>(rng.below(3));
            drawn = action == EditAction::add || !active.empty();
        }
        if (!drawn) throw ValidationError("could not sample a valid edit sequence");

        GridLightEdit edit;
        edit.action = action;
        if (action == EditAction::add) {
            ActiveLight a;
            a.id = next_id++;
            edit.cell = static_cast<int>(rng.below(kGridCells));
            a.lift = rng.uniform(kMinLightLift, kMaxLightLift);
            place(a.light, rng, edit.cell, a.lift, scene.depth());
            const NamedColor& color = vocab.colors[rng.below(vocab.colors.size())];
            a.color_name = color.name;
            a.light.color = color.normalized();
            a.light.intensity = rng.uniform(kMinEditIntensity, kMaxEditIntensity);
            a.light.ellipsoid_ratio = 1.0;
            a.light.diffuse_exponent = 1.0;
            active.push_back(a);
            edit.light = a.light;
            edit.color_name = a.color_name;
            edit.light_id = a.id;
        } else {
            const auto slot = static_cast<std::ptrdiff_t>(rng.below(active.size()));
            ActiveLight& a = active[slot];
            edit.cell = grid_cell_of(a.light.position[0], a.light.position[1]);
            edit.color_name = a.color_name;
            edit.light_id = a.id;
            if (action == EditAction::remove) {
                edit.light = a.light;
                active.erase(active.begin() + slot);
            } else {
                edit.target_cell = (edit.cell + 1 + static_cast<int>(rng.below(kGridCells - 1))) % kGridCells;
                place(a.light, rng, edit.target_cell, a.lift, scene.depth());
                edit.light = a.light;
            }
        }
        sample.edits.push_back(std::move(edit));
    }

    for (std::size_t i = 0; i < sample.edits.size(); ++i) {
        if (i > 0) sample.text += ", then ";
        sample.text += sample_positioning_text(vocab, sample.edits[i], mix_seed(seed, kTextStream + i));
    }
    sample.edited_image = render_edits(source, scene, sample.edits);
    return sample;
}

nlohmann::json edit_to_json(const GridLightEdit& edit) {
    nlohmann::json j = {{"action", to_string(edit.action)},
                        {"cell", edit.cell},
                        {"color_name", edit.color_name},
                        {"light_id", edit.light_id},
                        {"light", lights_to_json({edit.light}).at(0)}};
    if (edit.action == EditAction::move) j["target_cell"] = edit.target_cell;
    return j;
}

nlohmann::json sample_sidecar(const PositioningSample& sample) {
    auto edits = nlohmann::json::array();
    for (const GridLightEdit& e : sample.edits) edits.push_back(edit_to_json(e));
    return {{"edits", edits}, {"text", sample.text}, {"seed", sample.seed}};
}

}  // namespace relight
