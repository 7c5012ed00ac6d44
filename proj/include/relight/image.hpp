#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace relight {

/// Planar float image with interleaved channels, row-major.
///
/// Samples are linear values nominally in [0, 1]. Width and height are at
/// least 1 and channels is 1 or more (pipelines use 1 or 3; feature maps may
/// carry more). Operations below never mutate their inputs.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, int channels, float fill = 0.0f);
  ImageF(int width, int height, int channels, std::vector<float> data);

  static ImageF constant(int width, int height, int channels, float value) {
    return ImageF(width, height, channels, value);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int row, int col, int ch = 0) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }
  float& at(int row, int col, int ch = 0) noexcept { return data_[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const noexcept { return data_[index(row, col, ch)]; }

  /// All channels of one pixel.
  std::span<const float> pixel(int row, int col) const noexcept {
    return {data_.data() + index(row, col), static_cast<std::size_t>(channels_)};
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  bool same_shape(const ImageF& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const ImageF&, const ImageF&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Single-channel grid that may be empty along either axis. Used for the
/// per-edge coefficient maps, which are one shorter than the image.
using EdgeMap = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_power_of_two(int value) noexcept;

/// Block mean over factor x factor tiles. Non-divisible sizes are padded by
/// edge replication, so the result is ceil(dims / factor).
ImageF downsample_box(const ImageF& img, int factor);

/// Bilinear upsampling with half-pixel aligned centers and clamped borders.
ImageF upsample_bilinear(const ImageF& img, int factor);

/// Block minimum per channel, same padding rule as downsample_box.
ImageF min_pool(const ImageF& img, int factor);
EdgeMap min_pool(const EdgeMap& map, int factor);

/// Top-left crop.
ImageF crop(const ImageF& img, int width, int height);

/// Element-wise product. b may be single-channel, in which case it is
/// broadcast across the channels of a.
ImageF multiply(const ImageF& a, const ImageF& b);

/// Copies one channel out as a single-channel image.
ImageF extract_channel(const ImageF& img, int channel);

/// Replicates a single-channel image into `channels` identical channels.
ImageF broadcast_channels(const ImageF& gray, int channels);

bool all_finite(const ImageF& img) noexcept;

}  // namespace relight
