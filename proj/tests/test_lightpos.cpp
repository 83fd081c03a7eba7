#include <doctest.h>

#include <algorithm>
#include <set>

#include "relight/errors.hpp"
#include "relight/lightpos.hpp"
#include "relight/renderer.hpp"
#include "support/fixtures.hpp"

using namespace relight;
using namespace relight::testing;

namespace {

const PositioningVocab& vocab() {
    static const PositioningVocab v = load_vocabulary(default_vocabulary_path()).positioning;
    return v;
}

GridLightEdit add_edit(int cell, double intensity, const std::string& color = "Red") {
    GridLightEdit e;
    e.action = EditAction::add;
    e.cell = cell;
    e.color_name = color;
    e.light.color = vocab().color(color).normalized();
    const int row = cell / 3, col = cell % 3;
    e.light.position = {(col + 0.5) / 3.0, (row + 0.5) / 3.0, 0.3};
    e.light.intensity = intensity;
    e.light_id = 0;
    return e;
}

ImageF textured_source(int w, int h) {
    Rng rng(99);
    ImageF img(w, h, 3);
    for (double& v : img.data()) v = rng.uniform(0.0, 0.6);
    return img;
}

}  // namespace

TEST_CASE("grid cells") {
    CHECK(grid_cell_of(0.0, 0.0) == 0);
    CHECK(grid_cell_of(0.99, 0.0) == 2);
    CHECK(grid_cell_of(0.5, 0.5) == 4);
    CHECK(grid_cell_of(1.0, 1.0) == 8);
    CHECK(grid_cell_of(1.0 / 3.0, 0.0) == 1);
    CHECK(cell_contains(8, 0.9, 0.9));
    CHECK_FALSE(cell_contains(8, 0.5, 0.9));
    CHECK_FALSE(cell_contains(9, 0.5, 0.5));
}

TEST_CASE("zero-intensity add leaves the source unchanged") {
    const SceneMaps scene = bumpy_scene(20, 20, 1);
    const ImageF source = textured_source(20, 20);
    const std::vector<GridLightEdit> edits = {add_edit(4, 0.0)};
    CHECK(render_edits(source, scene, edits) == source);
}

TEST_CASE("add then remove restores the source exactly") {
    const SceneMaps scene = bumpy_scene(20, 20, 2);
    const ImageF source = textured_source(20, 20);
    GridLightEdit add = add_edit(3, 0.9);
    GridLightEdit remove = add;
    remove.action = EditAction::remove;
    const std::vector<GridLightEdit> edits = {add, remove};
    CHECK(render_edits(source, scene, edits) == source);
    CHECK(render_edits(source, scene, std::vector<GridLightEdit>{add}) != source);
}

TEST_CASE("a light added to the bottom-right cell brightens the bottom-right third") {
    const SceneMaps scene = flat_plane(30, 30, 0.0, 0.7);
    const ImageF source(30, 30, 3, 0.1);
    const ImageF edited = render_edits(source, scene, std::vector<GridLightEdit>{add_edit(8, 0.8, "White")});
    int best_r = 0, best_c = 0;
    double best = -1;
    for (int r = 0; r < 30; ++r) {
        for (int c = 0; c < 30; ++c) {
            const double d = edited.at(r, c, 0) - source.at(r, c, 0);
            if (d > best) {
                best = d;
                best_r = r;
                best_c = c;
            }
        }
    }
    CHECK(best_r >= 20);
    CHECK(best_c >= 20);
}

TEST_CASE("replaying edits rejects inconsistent sequences") {
    GridLightEdit remove = add_edit(0, 1.0);
    remove.action = EditAction::remove;
    CHECK_THROWS_AS(active_lights(std::vector<GridLightEdit>{remove}), ValidationError);
    const GridLightEdit add = add_edit(0, 1.0);
    CHECK_THROWS_AS(active_lights(std::vector<GridLightEdit>{add, add}), ValidationError);
}

TEST_CASE("sampled edit sequences satisfy the positioning invariants") {
    const SceneMaps scene = bumpy_scene(24, 18, 5);
    const ImageF source = textured_source(24, 18);
    std::set<std::size_t> lengths;
    std::set<EditAction> actions;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const PositioningSample s = synthesize_edit_sequence(source, scene, vocab(), seed);
        REQUIRE(!s.edits.empty());
        CHECK(s.edits.size() <= 3);
        lengths.insert(s.edits.size());
        for (const GridLightEdit& e : s.edits) {
            actions.insert(e.action);
            CHECK(cell_contains(placed_cell(e), e.light.position[0], e.light.position[1]));
            CHECK(e.light.color == vocab().color(e.color_name).normalized());
            CHECK_NOTHROW(validate_light(e.light));
            if (e.action == EditAction::add) {
                CHECK(e.light.intensity >= 0.2);
                CHECK(e.light.intensity <= 1.0);
                CHECK(e.light.ellipsoid_ratio == 1.0);
                CHECK(e.light.diffuse_exponent == 1.0);
                const double lift = e.light.position[2] - sample_bilinear(scene.depth(), e.light.position[0],
                                                                          e.light.position[1]);
                CHECK(lift >= 0.1 - 1e-12);
                CHECK(lift <= 0.5 + 1e-12);
            }
            if (e.action == EditAction::move) CHECK(e.target_cell != e.cell);
        }

        // Additive model: edited - source equals the rendered active lights.
        const ImageF added = compose(scene.albedo(), shade_all(active_lights(s.edits), scene));
        double worst = 0.0;
        for (std::size_t i = 0; i < added.data().size(); ++i) {
            worst = std::max(worst, std::abs(s.edited_image.data()[i] - source.data()[i] - added.data()[i]));
        }
        CHECK(worst <= 1e-6);
        CHECK(!s.text.empty());
    }
    CHECK(lengths == std::set<std::size_t>{1, 2, 3});
    CHECK(actions.size() == 3);
}

TEST_CASE("edit synthesis is deterministic per seed") {
    const SceneMaps scene = bumpy_scene(16, 16, 8);
    const ImageF source = textured_source(16, 16);
    const PositioningSample a = synthesize_edit_sequence(source, scene, vocab(), 77);
    const PositioningSample b = synthesize_edit_sequence(source, scene, vocab(), 77);
    CHECK(a.edited_image == b.edited_image);
    CHECK(a.text == b.text);
    CHECK(sample_sidecar(a) == sample_sidecar(b));
    CHECK_THROWS_AS(synthesize_edit_sequence(ImageF(8, 8, 3), scene, vocab(), 1), ValidationError);
}
