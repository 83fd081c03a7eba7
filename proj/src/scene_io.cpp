#include "relight/scene_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <png.h>

#include "relight/errors.hpp"

namespace relight {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return std::move(ss).str();
}

/// Cursor over the ASCII part of a PFM header.
class HeaderReader {
public:
    HeaderReader(std::string_view bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

    std::string_view token() {
        while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
        if (start == pos_) fail("truncated header");
        return bytes_.substr(start, pos_ - start);
    }

    template <typename T>
    T number() {
        const std::string_view tok = token();
        T value{};
        if constexpr (std::is_integral_v<T>) {
            auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
            if (ec != std::errc() || end != tok.data() + tok.size()) fail("bad number '" + std::string(tok) + "'");
        } else {
            // from_chars for floating point is incomplete in some libstdc++ versions.
            std::string s(tok);
            char* end = nullptr;
            value = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size()) fail("bad number '" + s + "'");
        }
        return value;
    }

    /// The header ends with exactly one whitespace byte before the payload.
    std::size_t payload_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            fail("missing separator before payload");
        }
        return pos_ + 1;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw FormatError("malformed PFM " + path_.string() + ": " + why);
    }

private:
    std::string_view bytes_;
    const fs::path& path_;
    std::size_t pos_ = 0;
};

float decode_float(const char* p, bool little_endian) {
    std::uint32_t bits;
    std::memcpy(&bits, p, sizeof bits);
    if (little_endian != (std::endian::native == std::endian::little)) bits = __builtin_bswap32(bits);
    return std::bit_cast<float>(bits);
}

void require_key(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key)) throw ValidationError(std::string("light record missing key '") + key + "'");
}

Vec3 read_vec3(const nlohmann::json& obj, const char* key) {
    require_key(obj, key);
    const auto& arr = obj.at(key);
    if (!arr.is_array() || arr.size() != 3) {
        throw ValidationError(std::string("light field '") + key + "' must be an array of 3 numbers");
    }
    Vec3 v{};
    for (int i = 0; i < 3; ++i) {
        if (!arr[i].is_number()) throw ValidationError(std::string("light field '") + key + "' is not numeric");
        v[i] = arr[i].get<double>();
    }
    return v;
}

double read_scalar(const nlohmann::json& obj, const char* key) {
    require_key(obj, key);
    if (!obj.at(key).is_number()) throw ValidationError(std::string("light field '") + key + "' is not numeric");
    return obj.at(key).get<double>();
}

}  // namespace

ImageF load_float_map(const fs::path& path) {
    const std::string bytes = read_file(path);
    HeaderReader header(bytes, path);

    const std::string_view magic = header.token();
    int channels = 0;
    if (magic == "PF") {
        channels = 3;
    } else if (magic == "Pf") {
        channels = 1;
    } else {
        header.fail("unknown magic '" + std::string(magic) + "'");
    }
    const int width = header.number<int>();
    const int height = header.number<int>();
    const double scale = header.number<double>();
    if (width <= 0 || height <= 0) header.fail("nonpositive dimensions");
    if (scale == 0.0 || !std::isfinite(scale)) header.fail("scale must be finite and nonzero");
    const bool little_endian = scale < 0.0;

    const std::size_t offset = header.payload_offset();
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - offset != count * sizeof(float)) {
        header.fail("payload holds " + std::to_string(bytes.size() - offset) + " bytes, expected " +
                    std::to_string(count * sizeof(float)));
    }

    ImageF img(width, height, channels);
    const char* payload = bytes.data() + offset;
    const std::size_t row_len = static_cast<std::size_t>(width) * channels;
    // PFM stores the bottom row first.
    for (int r = 0; r < height; ++r) {
        const char* src = payload + static_cast<std::size_t>(height - 1 - r) * row_len * sizeof(float);
        auto dst = img.row(r);
        for (std::size_t i = 0; i < row_len; ++i) dst[i] = decode_float(src + i * sizeof(float), little_endian);
    }
    img.require_finite(path.string().c_str());
    return img;
}

void save_float_map(const ImageF& img, const fs::path& path) {
    if (img.empty()) throw ValidationError("cannot save an empty float map");
    img.require_finite("save_float_map");

    std::string out = (img.channels() == 3 ? "PF\n" : "Pf\n") + std::to_string(img.width()) + " " +
                      std::to_string(img.height()) + "\n-1.0\n";
    const std::size_t header_len = out.size();
    out.resize(header_len + img.data().size() * sizeof(float));
    char* dst = out.data() + header_len;
    for (int r = img.height() - 1; r >= 0; --r) {
        for (double v : img.row(r)) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            if constexpr (std::endian::native != std::endian::little) bits = __builtin_bswap32(bits);
            std::memcpy(dst, &bits, sizeof bits);
            dst += sizeof bits;
        }
    }
    write_file_atomic(path, out);
}

unsigned char quantize_preview(double value) {
    const double clamped = std::isnan(value) ? 0.0 : std::clamp(value, 0.0, 1.0);
    // nearbyint honours the default round-to-nearest-even mode.
    return static_cast<unsigned char>(std::nearbyint(clamped * 255.0));
}

void save_preview_png(const ImageF& img, const fs::path& path) {
    if (img.empty()) throw ValidationError("cannot save an empty preview");
    if (img.channels() != 1 && img.channels() != 3) throw ValidationError("preview needs 1 or 3 channels");

    std::vector<unsigned char> pixels(img.data().size());
    std::transform(img.data().begin(), img.data().end(), pixels.begin(), quantize_preview);

    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw IoError(std::string("PNG encoding failed: ") + image.message);
    }
    std::string encoded(size, '\0');
    if (!png_image_write_to_memory(&image, encoded.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw IoError(std::string("PNG encoding failed: ") + image.message);
    }
    encoded.resize(size);
    write_file_atomic(path, encoded);
}

nlohmann::json lights_to_json(const LightList& lights) {
    auto doc = nlohmann::json::array();
    for (const PointLight& l : lights) {
        doc.push_back({{"color", l.color},
                       {"position", l.position},
                       {"intensity", l.intensity},
                       {"ellipsoid_ratio", l.ellipsoid_ratio},
                       {"diffuse_exponent", l.diffuse_exponent}});
    }
    return doc;
}

LightList lights_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw ValidationError("light file must hold a JSON array");
    LightList lights;
    lights.reserve(doc.size());
    for (const auto& rec : doc) {
        if (!rec.is_object()) throw ValidationError("light record must be an object");
        PointLight l;
        l.color = read_vec3(rec, "color");
        l.position = read_vec3(rec, "position");
        l.intensity = read_scalar(rec, "intensity");
        l.ellipsoid_ratio = read_scalar(rec, "ellipsoid_ratio");
        l.diffuse_exponent = read_scalar(rec, "diffuse_exponent");
        validate_light(l);
        lights.push_back(l);
    }
    return lights;
}

LightList load_lights(const fs::path& path) {
    const std::string text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return lights_from_json(doc);
}

void save_lights(const LightList& lights, const fs::path& path) {
    for (const PointLight& l : lights) validate_light(l);
    write_file_atomic(path, dump_json(lights_to_json(lights)));
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

SceneMaps load_scene(const fs::path& albedo, const fs::path& normal, const fs::path& depth) {
    return SceneMaps(load_float_map(albedo), load_float_map(normal), load_float_map(depth));
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(tid);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw IoError("write failed: " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

}  // namespace relight
