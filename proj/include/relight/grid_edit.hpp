#pragma once

#include <string>
#include <string_view>

#include "relight/light.hpp"

namespace relight {

enum class EditAction { add, remove, move };

std::string_view to_string(EditAction action);
EditAction parse_edit_action(std::string_view text);

/// One light-positioning edit on the 3x3 image grid.
///
/// Cells are numbered row-major from the top-left (0) to the bottom-right (8).
/// For `add` the light is the new light; for `remove` it is the light taken
/// away; for `move` it is the light after moving into `target_cell`.
/// `light_id` identifies an added light across later edits.
struct GridLightEdit {
    EditAction action = EditAction::add;
    int cell = 0;
    int target_cell = -1;
    std::string color_name;
    PointLight light;
    int light_id = 0;
};

inline constexpr int kGridSize = 3;
inline constexpr int kGridCells = kGridSize * kGridSize;

/// Cell containing normalized point (x, y); each axis uses [c/3, (c+1)/3).
int grid_cell_of(double x, double y);

/// True when (x, y) lies inside `cell`.
bool cell_contains(int cell, double x, double y);

/// The cell a light should occupy after this edit.
inline int placed_cell(const GridLightEdit& edit) {
    return edit.action == EditAction::move ? edit.target_cell : edit.cell;
}

}  // namespace relight
