#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "relight/image.hpp"
#include "relight/light.hpp"

namespace relight {

namespace fs = std::filesystem;

/// Reads a PFM file ("PF" = 3 channels, "Pf" = 1 channel). A negative scale
/// marks little-endian payload. Rows are flipped so row 0 is the top row.
ImageF load_float_map(const fs::path& path);

/// Writes a little-endian PFM (scale -1). Samples are narrowed to float32.
void save_float_map(const ImageF& img, const fs::path& path);

/// Writes an 8-bit PNG preview: clamp to [0,1], scale by 255, round half to even.
void save_preview_png(const ImageF& img, const fs::path& path);

/// 8-bit quantization used by save_preview_png.
unsigned char quantize_preview(double value);

LightList load_lights(const fs::path& path);
void save_lights(const LightList& lights, const fs::path& path);

nlohmann::json lights_to_json(const LightList& lights);
LightList lights_from_json(const nlohmann::json& doc);

/// Indented JSON text. Doubles use the shortest representation that parses
/// back to the same bits.
std::string dump_json(const nlohmann::json& doc);

/// Loads albedo/normal/depth maps and builds a validated SceneMaps.
SceneMaps load_scene(const fs::path& albedo, const fs::path& normal, const fs::path& depth);

/// Writes `bytes` to `path` through a sibling temporary file and a rename, so
/// readers never observe a partially written file.
void write_file_atomic(const fs::path& path, std::string_view bytes);

}  // namespace relight
