#include "relight/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relight/errors.hpp"
#include "relight/light.hpp"

namespace relight {

namespace {

constexpr double kNormalTolerance = 1e-2;

void require_shape(int width, int height, int channels) {
    if (width < 0 || height < 0) throw ValidationError("image dimensions must be nonnegative");
    if (channels != 1 && channels != 3) {
        throw ValidationError("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
}

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

ImageF::ImageF(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    require_shape(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageF::ImageF(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    require_shape(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw ValidationError("image data length does not match width x height x channels");
    }
}

void ImageF::require_finite(const char* what) const {
    for (double v : data_) {
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": non-finite sample");
    }
}

double sample_bilinear(const ImageF& img, double x, double y) {
    if (img.empty()) throw ValidationError("bilinear sample on empty image");
    const double fx = std::clamp(x * img.width() - 0.5, 0.0, img.width() - 1.0);
    const double fy = std::clamp(y * img.height() - 0.5, 0.0, img.height() - 1.0);
    const int c0 = static_cast<int>(fx);
    const int r0 = static_cast<int>(fy);
    const int c1 = std::min(c0 + 1, img.width() - 1);
    const int r1 = std::min(r0 + 1, img.height() - 1);
    const double tx = fx - c0;
    const double ty = fy - r0;
    const double v00 = img.at(r0, c0), v01 = img.at(r0, c1);
    const double v10 = img.at(r1, c0), v11 = img.at(r1, c1);
    // Lerp form keeps constant maps exact.
    const double top = v00 + tx * (v01 - v00);
    const double bottom = v10 + tx * (v11 - v10);
    return top + ty * (bottom - top);
}

void require_same_size(const ImageF& a, const ImageF& b, const char* what) {
    if (!a.same_size(b)) {
        throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                              "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                              "x" + std::to_string(b.height()) + ")");
    }
}

void require_channels(const ImageF& img, int channels, const char* what) {
    if (img.channels() != channels) {
        throw ValidationError(std::string(what) + ": expected " + std::to_string(channels) +
                              " channel(s), got " + std::to_string(img.channels()));
    }
}

SceneMaps::SceneMaps(ImageF albedo, ImageF normal, ImageF depth)
    : albedo_(std::move(albedo)), normal_(std::move(normal)), depth_(std::move(depth)) {
    require_channels(albedo_, 3, "albedo");
    require_channels(normal_, 3, "normal");
    require_channels(depth_, 1, "depth");
    require_same_size(albedo_, normal_, "albedo/normal");
    require_same_size(albedo_, depth_, "albedo/depth");
    if (albedo_.empty()) throw ValidationError("scene maps are empty");

    for (double v : albedo_.data()) {
        if (!in_unit_interval(v)) throw ValidationError("albedo outside [0,1]");
    }
    for (double v : depth_.data()) {
        if (!in_unit_interval(v)) throw ValidationError("depth outside [0,1]");
    }
    auto n = normal_.data();
    for (std::size_t i = 0; i < n.size(); i += 3) {
        const double len = std::sqrt(n[i] * n[i] + n[i + 1] * n[i + 1] + n[i + 2] * n[i + 2]);
        if (!std::isfinite(len) || std::abs(len - 1.0) >= kNormalTolerance) {
            throw ValidationError("normal map contains a non-unit vector (length " + std::to_string(len) +
                                  ")");
        }
        if (len != 1.0) {
            n[i] /= len;
            n[i + 1] /= len;
            n[i + 2] /= len;
        }
    }
}

void validate_light(const PointLight& light) {
    auto finite = [](double v) { return std::isfinite(v); };
    for (double c : light.color) {
        if (!finite(c) || !in_unit_interval(c)) throw ValidationError("light color outside [0,1]");
    }
    for (double p : light.position) {
        if (!finite(p)) throw ValidationError("light position is not finite");
    }
    if (!finite(light.intensity) || light.intensity < 0.0) {
        throw ValidationError("light intensity must be >= 0");
    }
    if (!finite(light.ellipsoid_ratio) || light.ellipsoid_ratio <= 0.0) {
        throw ValidationError("light ellipsoid_ratio must be > 0");
    }
    if (!finite(light.diffuse_exponent) || light.diffuse_exponent <= 0.0) {
        throw ValidationError("light diffuse_exponent must be > 0");
    }
}

}  // namespace relight
