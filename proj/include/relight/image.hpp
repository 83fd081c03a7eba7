#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relight {

/// Row-major, channel-interleaved floating image. Row 0 is the top row.
///
/// Values are held in double precision so that arithmetic on map values
/// (depth offsets, losses) is not limited by storage rounding. Float maps on
/// disk are float32; anything loaded from disk is float32-representable.
class ImageF {
public:
    ImageF() = default;
    ImageF(int width, int height, int channels, double fill = 0.0);
    ImageF(int width, int height, int channels, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return data_.empty(); }

    double& at(int row, int col, int ch = 0) { return data_[index(row, col, ch)]; }
    double at(int row, int col, int ch = 0) const { return data_[index(row, col, ch)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<double> row(int r) { return data().subspan(index(r, 0, 0), row_stride()); }
    std::span<const double> row(int r) const { return data().subspan(index(r, 0, 0), row_stride()); }

    bool same_size(const ImageF& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Throws ValidationError if any sample is NaN or infinite.
    void require_finite(const char* what) const;

    friend bool operator==(const ImageF&, const ImageF&) = default;

private:
    std::size_t row_stride() const { return static_cast<std::size_t>(width_) * channels_; }
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Normalized image coordinate of a pixel centre: (index + 0.5) / extent.
inline double pixel_center(int index, int extent) { return (index + 0.5) / extent; }

/// Bilinear lookup of channel 0 at normalized coordinates, using the
/// pixel-centre convention and clamping to the border.
double sample_bilinear(const ImageF& img, double x, double y);

/// Per-pixel intrinsic layers of one scene.
///
/// Construction validates: 3-channel albedo in [0,1], 3-channel normals that
/// are unit length (re-normalized when off by less than 1e-2, rejected
/// otherwise), 1-channel depth in [0,1], identical dimensions.
class SceneMaps {
public:
    SceneMaps(ImageF albedo, ImageF normal, ImageF depth);

    const ImageF& albedo() const { return albedo_; }
    const ImageF& normal() const { return normal_; }
    const ImageF& depth() const { return depth_; }
    int width() const { return albedo_.width(); }
    int height() const { return albedo_.height(); }

private:
    ImageF albedo_;
    ImageF normal_;
    ImageF depth_;
};

/// Throws ValidationError unless `a` and `b` have equal width and height.
void require_same_size(const ImageF& a, const ImageF& b, const char* what);

/// Throws ValidationError unless `img` has exactly `channels` channels.
void require_channels(const ImageF& img, int channels, const char* what);

}  // namespace relight
