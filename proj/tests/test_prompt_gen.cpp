#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "relight/errors.hpp"
#include "relight/prompt_gen.hpp"
#include "support/inclusion_oracle.hpp"

using namespace relight;

namespace {

const Vocabulary& shipped() {
    static const Vocabulary v = load_vocabulary(default_vocabulary_path());
    return v;
}

bool contains(const std::vector<std::string>& words, const std::string& w) {
    return std::find(words.begin(), words.end(), w) != words.end();
}

}  // namespace

TEST_CASE("shipped hierarchy holds the nineteen categories") {
    const PromptHierarchy& h = shipped().hierarchy;
    CHECK(h.categories.size() == 19);
    for (std::string_view name : kCategoryNames) CHECK_NOTHROW(h.category(name));
    CHECK(h.category("Light location").words.size() == 13);
    for (const Category& c : h.categories) {
        if (c.name != "Light location") CHECK(c.words.size() >= 30);
    }
    CHECK(h.category("Light location").weight == 3.0);
    CHECK(h.category("Color").weight == 3.0);
    CHECK(h.category("Smell").weight == 1.0);
    CHECK(contains(h.category("Atmosphere").words, "Cozy"));
    CHECK(contains(h.category("Time").words, "Witching hour"));
    CHECK(contains(h.category("Universe").words, "Event Horizon"));
}

TEST_CASE("shipped positioning vocabulary") {
    const PositioningVocab& p = shipped().positioning;
    CHECK(p.color("Black").rgb == std::array<int, 3>{0, 0, 0});
    CHECK(p.color("Tomato").rgb == std::array<int, 3>{255, 99, 71});
    CHECK(p.color("Blue").rgb == std::array<int, 3>{0, 0, 255});
    // Repeated names keep their first entry.
    CHECK(p.color("Dark Gray").rgb == std::array<int, 3>{64, 64, 64});
    CHECK_THROWS_AS(p.color("Blurple"), ValidationError);
    CHECK(p.action_group("add").phrases ==
          std::vector<std::string>{"add", "incorporate", "include", "insert", "append"});
    CHECK(p.grid_labels[0] == "top-left");
    CHECK(p.grid_labels[2] == "top-right");
    CHECK(p.grid_labels[8] == "bottom-right");
}

TEST_CASE("vocabulary validation") {
    nlohmann::json doc = nlohmann::json::parse(std::ifstream(default_vocabulary_path()));
    SUBCASE("missing category") {
        doc["categories"].erase(doc["categories"].begin());
        CHECK_THROWS_AS(vocabulary_from_json(doc), ValidationError);
    }
    SUBCASE("nonpositive weight") {
        doc["categories"][0]["weight"] = 0.0;
        CHECK_THROWS_AS(vocabulary_from_json(doc), ValidationError);
    }
    SUBCASE("too few words") {
        doc["categories"][0]["words"] = {"a", "b"};
        CHECK_THROWS_AS(vocabulary_from_json(doc), ValidationError);
    }
    SUBCASE("color component out of range") {
        doc["colors"][0]["rgb"] = {0, 0, 256};
        CHECK_THROWS_AS(vocabulary_from_json(doc), ValidationError);
    }
    SUBCASE("wrong grid label count") {
        doc["grid_labels"].erase(doc["grid_labels"].begin());
        CHECK_THROWS_AS(vocabulary_from_json(doc), ValidationError);
    }
}

TEST_CASE("constraints are closed over the vocabulary and sized two to six") {
    const PromptHierarchy& h = shipped().hierarchy;
    std::set<std::size_t> sizes;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const Constraint c = sample_constraint(h, seed);
        REQUIRE(c.selected_words.size() == c.categories.size());
        CHECK(c.selected_words.size() >= 2);
        CHECK(c.selected_words.size() <= 6);
        sizes.insert(c.selected_words.size());
        CHECK(std::set<std::string>(c.categories.begin(), c.categories.end()).size() == c.categories.size());
        for (std::size_t i = 0; i < c.categories.size(); ++i) {
            CHECK(contains(h.category(c.categories[i]).words, c.selected_words[i]));
            CHECK(c.question.find("'" + c.selected_words[i] + "'") != std::string::npos);
        }
    }
    CHECK(sizes == std::set<std::size_t>{2, 3, 4, 5, 6});
}

TEST_CASE("constraint sampling is deterministic per seed") {
    const Constraint a = sample_constraint(shipped().hierarchy, 42);
    const Constraint b = sample_constraint(shipped().hierarchy, 42);
    CHECK(a.selected_words == b.selected_words);
    CHECK(a.question == b.question);
}

TEST_CASE("question template") {
    CHECK(constraint_question({"cozy", "warm"}) ==
          "could you describe the lighting property of a random scene using the words of 'cozy' and 'warm'?");
    CHECK(constraint_question({"a", "b", "c"}) ==
          "could you describe the lighting property of a random scene using the words of 'a', 'b' and 'c'?");
}

TEST_CASE("favoured categories appear more often, matching exact inclusion probabilities") {
    PromptHierarchy h = shipped().hierarchy;
    std::vector<double> weights;
    for (Category& c : h.categories) {
        c.weight = (c.name == "Light location" || c.name == "Color") ? 5.0 : 1.0;
        weights.push_back(c.weight);
    }
    const std::vector<double> expected = testing::inclusion_probabilities(weights, 2, 6);

    constexpr int kSamples = 10000;
    std::vector<int> hits(h.categories.size(), 0);
    for (int s = 0; s < kSamples; ++s) {
        for (const std::string& name : sample_constraint(h, 1'000'000 + s).categories) {
            for (std::size_t i = 0; i < h.categories.size(); ++i) {
                if (h.categories[i].name == name) ++hits[i];
            }
        }
    }
    for (std::size_t i = 0; i < h.categories.size(); ++i) {
        const double freq = static_cast<double>(hits[i]) / kSamples;
        const double sigma = std::sqrt(expected[i] * (1 - expected[i]) / kSamples);
        CHECK(std::abs(freq - expected[i]) <= 3 * sigma);
    }
    auto freq_of = [&](std::string_view name) {
        for (std::size_t i = 0; i < h.categories.size(); ++i) {
            if (h.categories[i].name == name) return static_cast<double>(hits[i]) / kSamples;
        }
        return 0.0;
    };
    const double unit = freq_of("Smell");
    const double sigma = std::sqrt(unit * (1 - unit) / kSamples);
    CHECK(freq_of("Light location") >= 2 * (unit - 3 * sigma));
    CHECK(freq_of("Color") >= 2 * (unit - 3 * sigma));
}

TEST_CASE("positioning text") {
    const PositioningVocab& p = shipped().positioning;
    GridLightEdit edit;
    edit.action = EditAction::add;
    edit.cell = 2;
    edit.color_name = "Blue";

    const std::string text = sample_positioning_text(p, edit, 7);
    CHECK(text == sample_positioning_text(p, edit, 7));
    const std::string suffix = " a Blue light at the top-right";
    REQUIRE(text.size() > suffix.size());
    CHECK(text.substr(text.size() - suffix.size()) == suffix);
    CHECK(contains(p.action_group("add").phrases, text.substr(0, text.size() - suffix.size())));

    std::set<std::string> verbs;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const std::string t = sample_positioning_text(p, edit, s);
        verbs.insert(t.substr(0, t.size() - suffix.size()));
    }
    CHECK(verbs.size() == 5);

    edit.action = EditAction::move;
    edit.target_cell = 4;
    const std::string moved = sample_positioning_text(p, edit, 3);
    CHECK(moved.find("a Blue light from the top-right to the center") != std::string::npos);

    edit.color_name = "Blurple";
    CHECK_THROWS_AS(sample_positioning_text(p, edit, 1), ValidationError);
}
