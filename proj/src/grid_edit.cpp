#include "relight/grid_edit.hpp"

#include <string>

#include "relight/errors.hpp"

namespace relight {

namespace {

double cell_low(int index) { return index / static_cast<double>(kGridSize); }
double cell_high(int index) { return (index + 1) / static_cast<double>(kGridSize); }

int axis_index(double v) {
    for (int i = 0; i < kGridSize - 1; ++i) {
        if (v < cell_high(i)) return i;
    }
    return kGridSize - 1;
}

}  // namespace

std::string_view to_string(EditAction action) {
    switch (action) {
        case EditAction::add: return "add";
        case EditAction::remove: return "remove";
        case EditAction::move: return "move";
    }
    return "add";
}

EditAction parse_edit_action(std::string_view text) {
    if (text == "add") return EditAction::add;
    if (text == "remove") return EditAction::remove;
    if (text == "move") return EditAction::move;
    throw ValidationError("unknown edit action '" + std::string(text) + "'");
}

int grid_cell_of(double x, double y) { return axis_index(y) * kGridSize + axis_index(x); }

bool cell_contains(int cell, double x, double y) {
    if (cell < 0 || cell >= kGridCells) return false;
    const int row = cell / kGridSize;
    const int col = cell % kGridSize;
    return x >= cell_low(col) && x < cell_high(col) && y >= cell_low(row) && y < cell_high(row);
}

}  // namespace relight
