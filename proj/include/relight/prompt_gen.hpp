#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relight/grid_edit.hpp"

namespace relight {

/// The nineteen lighting-related categories of the prompt hierarchy.
inline constexpr std::array<std::string_view, 19> kCategoryNames = {
    "Time",     "Atmosphere", "Location", "Source type",         "Intensity",
    "Temperature", "Directionality", "Lighting effect", "Purpose of lighting", "Emotions",
    "Taste",    "Smell",      "Sound",    "Touch",               "Color",
    "Shape",    "Weather",    "Universe", "Light location"};

/// Fewest sub-category words any category may have ("Light location").
inline constexpr std::size_t kMinCategoryWords = 13;

struct Category {
    std::string name;
    double weight = 1.0;
    std::vector<std::string> words;
};

struct PromptHierarchy {
    std::vector<Category> categories;

    /// Exactly the nineteen named categories, each with enough words and a
    /// strictly positive weight.
    void validate() const;
    const Category& category(std::string_view name) const;
};

struct ActionGroup {
    std::string group;
    std::vector<std::string> phrases;
};

struct NamedColor {
    std::string name;
    std::array<int, 3> rgb{};

    Vec3 normalized() const { return {rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0}; }
};

struct PositioningVocab {
    std::vector<ActionGroup> actions;
    /// Unique color names in table order.
    std::vector<NamedColor> colors;
    std::array<std::string, kGridCells> grid_labels;

    void validate() const;
    /// Throws ValidationError for names outside the table.
    const NamedColor& color(std::string_view name) const;
    const ActionGroup& action_group(std::string_view group) const;
};

struct Vocabulary {
    PromptHierarchy hierarchy;
    PositioningVocab positioning;
};

/// Parses the vocabulary document
/// {categories: [{name, weight, words}], actions: [{group, phrases}],
///  colors: [{name, rgb}], grid_labels: [...]}.
/// Repeated color names keep their first table entry.
Vocabulary vocabulary_from_json(const nlohmann::json& doc);
Vocabulary load_vocabulary(const std::filesystem::path& path);

/// Location of the vocabulary file shipped with the sources.
std::filesystem::path default_vocabulary_path();

struct Constraint {
    std::vector<std::string> categories;
    std::vector<std::string> selected_words;
    std::string question;
};

/// Builds the LLM question constraining a description to `words`.
std::string constraint_question(const std::vector<std::string>& words);

/// Draws k uniform in [2, 6], then k distinct categories by successive
/// weighted draws with renormalization, then one word uniformly per category.
Constraint sample_constraint(const PromptHierarchy& hierarchy, std::uint64_t seed);

nlohmann::json constraint_to_json(const Constraint& constraint);

/// Instruction text for one edit, with the verb drawn from the action's
/// synonym group.
std::string sample_positioning_text(const PositioningVocab& vocab, const GridLightEdit& edit,
                                    std::uint64_t seed);

}  // namespace relight
