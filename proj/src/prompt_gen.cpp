#include "relight/prompt_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "relight/errors.hpp"
#include "relight/rng.hpp"

#ifndef RELIGHT_DATA_DIR
#define RELIGHT_DATA_DIR "data"
#endif

namespace relight {

namespace {

constexpr int kMinSelected = 2;
constexpr int kMaxSelected = 6;

const nlohmann::json& field(const nlohmann::json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ValidationError(std::string("vocabulary: missing key '") + key + "'");
    }
    return obj.at(key);
}

std::vector<std::string> string_list(const nlohmann::json& arr, const char* what) {
    if (!arr.is_array()) throw ValidationError(std::string("vocabulary: '") + what + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string() || v.get<std::string>().empty()) {
            throw ValidationError(std::string("vocabulary: '") + what + "' holds a non-string or empty entry");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

void PromptHierarchy::validate() const {
    if (categories.size() != kCategoryNames.size()) {
        throw ValidationError("prompt hierarchy must have " + std::to_string(kCategoryNames.size()) +
                              " categories, got " + std::to_string(categories.size()));
    }
    std::set<std::string_view> seen;
    for (const Category& c : categories) {
        if (std::find(kCategoryNames.begin(), kCategoryNames.end(), c.name) == kCategoryNames.end()) {
            throw ValidationError("unknown prompt category '" + c.name + "'");
        }
        if (!seen.insert(c.name).second) throw ValidationError("duplicate prompt category '" + c.name + "'");
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw ValidationError("category '" + c.name + "' needs a positive weight");
        }
        if (c.words.size() < kMinCategoryWords) {
            throw ValidationError("category '" + c.name + "' has only " + std::to_string(c.words.size()) + " words");
        }
    }
}

const Category& PromptHierarchy::category(std::string_view name) const {
    for (const Category& c : categories) {
        if (c.name == name) return c;
    }
    throw ValidationError("unknown prompt category '" + std::string(name) + "'");
}

void PositioningVocab::validate() const {
    if (colors.empty()) throw ValidationError("positioning vocabulary has no colors");
    for (const NamedColor& c : colors) {
        for (int v : c.rgb) {
            if (v < 0 || v > 255) throw ValidationError("color '" + c.name + "' has a component outside [0,255]");
        }
    }
    for (const char* group : {"add", "remove", "move"}) action_group(group);
    for (const ActionGroup& g : actions) {
        if (g.phrases.empty()) throw ValidationError("action group '" + g.group + "' is empty");
    }
    for (const std::string& label : grid_labels) {
        if (label.empty()) throw ValidationError("grid label is empty");
    }
}

const NamedColor& PositioningVocab::color(std::string_view name) const {
    for (const NamedColor& c : colors) {
        if (c.name == name) return c;
    }
    throw ValidationError("unknown color '" + std::string(name) + "'");
}

const ActionGroup& PositioningVocab::action_group(std::string_view group) const {
    for (const ActionGroup& g : actions) {
        if (g.group == group) return g;
    }
    throw ValidationError("unknown action group '" + std::string(group) + "'");
}

Vocabulary vocabulary_from_json(const nlohmann::json& doc) {
    Vocabulary vocab;
    try {
        for (const auto& c : field(doc, "categories")) {
            Category cat;
            cat.name = field(c, "name").get<std::string>();
            cat.weight = field(c, "weight").get<double>();
            cat.words = string_list(field(c, "words"), "words");
            vocab.hierarchy.categories.push_back(std::move(cat));
        }
        for (const auto& a : field(doc, "actions")) {
            ActionGroup group;
            group.group = field(a, "group").get<std::string>();
            group.phrases = string_list(field(a, "phrases"), "phrases");
            vocab.positioning.actions.push_back(std::move(group));
        }
        for (const auto& c : field(doc, "colors")) {
            NamedColor color;
            color.name = field(c, "name").get<std::string>();
            const auto& rgb = field(c, "rgb");
            if (!rgb.is_array() || rgb.size() != 3) throw ValidationError("color '" + color.name + "' needs 3 components");
            for (int i = 0; i < 3; ++i) color.rgb[i] = rgb[i].get<int>();
            const bool repeated = std::any_of(vocab.positioning.colors.begin(), vocab.positioning.colors.end(),
                                              [&](const NamedColor& seen) { return seen.name == color.name; });
            if (!repeated) vocab.positioning.colors.push_back(std::move(color));
        }
        const auto labels = string_list(field(doc, "grid_labels"), "grid_labels");
        if (labels.size() != kGridCells) throw ValidationError("vocabulary needs exactly 9 grid labels");
        std::copy(labels.begin(), labels.end(), vocab.positioning.grid_labels.begin());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("vocabulary: ") + e.what());
    }
    vocab.hierarchy.validate();
    vocab.positioning.validate();
    return vocab;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return vocabulary_from_json(doc);
}

std::filesystem::path default_vocabulary_path() {
    return std::filesystem::path(RELIGHT_DATA_DIR) / "vocabulary.json";
}

std::string constraint_question(const std::vector<std::string>& words) {
    std::ostringstream q;
    q << "could you describe the lighting property of a random scene using the words of ";
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) q << (i + 1 == words.size() ? " and " : ", ");
        q << '\'' << words[i] << '\'';
    }
    q << '?';
    return q.str();
}

Constraint sample_constraint(const PromptHierarchy& hierarchy, std::uint64_t seed) {
    hierarchy.validate();
    Rng rng(seed);
    const int k = rng.between(kMinSelected, kMaxSelected);

    std::vector<std::size_t> remaining(hierarchy.categories.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

    std::vector<std::size_t> chosen;
    for (int draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (std::size_t idx : remaining) total += hierarchy.categories[idx].weight;
        const double u = rng.uniform() * total;
        std::size_t slot = remaining.size() - 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            acc += hierarchy.categories[remaining[j]].weight;
            if (u < acc) {
                slot = j;
                break;
            }
        }
        chosen.push_back(remaining[slot]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(slot));
    }

    Constraint out;
    for (std::size_t idx : chosen) {
        const Category& cat = hierarchy.categories[idx];
        out.categories.push_back(cat.name);
        out.selected_words.push_back(cat.words[rng.below(cat.words.size())]);
    }
    out.question = constraint_question(out.selected_words);
    return out;
}

nlohmann::json constraint_to_json(const Constraint& constraint) {
    return {{"categories", constraint.categories},
            {"selected_words", constraint.selected_words},
            {"question", constraint.question}};
}

std::string sample_positioning_text(const PositioningVocab& vocab, const GridLightEdit& edit, std::uint64_t seed) {
    const NamedColor& color = vocab.color(edit.color_name);
    if (edit.cell < 0 || edit.cell >= kGridCells) throw ValidationError("edit cell outside the 3x3 grid");
    const ActionGroup& group = vocab.action_group(to_string(edit.action));

    Rng rng(seed);
    const std::string& verb = group.phrases[rng.below(group.phrases.size())];
    std::string text = verb + " a " + color.name + " light ";
    if (edit.action == EditAction::move) {
        if (edit.target_cell < 0 || edit.target_cell >= kGridCells) {
            throw ValidationError("move edit needs a target cell inside the grid");
        }
        text += "from the " + vocab.grid_labels[edit.cell] + " to the " + vocab.grid_labels[edit.target_cell];
    } else {
        text += "at the " + vocab.grid_labels[edit.cell];
    }
    return text;
}

}  // namespace relight
