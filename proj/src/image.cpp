#include "relight/image.hpp"

#include "relight/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace relight {

ImageF::ImageF(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || channels < 1) {
    throw InvalidArgument("image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageF::ImageF(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1 || channels < 1) {
    throw InvalidArgument("image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidArgument("image data length does not match dimensions");
  }
}

bool is_power_of_two(int value) noexcept { return value > 0 && (value & (value - 1)) == 0; }

namespace {

void check_factor(int factor) {
  if (!is_power_of_two(factor)) {
    throw InvalidArgument("resampling factor must be a positive power of two, got " +
                          std::to_string(factor));
  }
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Reduces factor x factor tiles of a rows x cols x channels grid. Reads past
// the last row/column clamp to it (edge replication).
template <typename Read, typename Write, typename Reduce>
void block_reduce(int rows, int cols, int channels, int factor, Read read, Write write,
                  Reduce reduce, float init, bool average) {
  const int out_rows = ceil_div(rows, factor);
  const int out_cols = ceil_div(cols, factor);
  const float inv_count = 1.0f / static_cast<float>(factor * factor);
  for (int orow = 0; orow < out_rows; ++orow) {
    for (int ocol = 0; ocol < out_cols; ++ocol) {
      for (int ch = 0; ch < channels; ++ch) {
        if (average) {
          double sum = 0.0;
          for (int dr = 0; dr < factor; ++dr) {
            const int r = std::min(orow * factor + dr, rows - 1);
            for (int dc = 0; dc < factor; ++dc) {
              const int c = std::min(ocol * factor + dc, cols - 1);
              sum += read(r, c, ch);
            }
          }
          write(orow, ocol, ch, static_cast<float>(sum * inv_count));
        } else {
          float acc = init;
          for (int dr = 0; dr < factor; ++dr) {
            const int r = std::min(orow * factor + dr, rows - 1);
            for (int dc = 0; dc < factor; ++dc) {
              const int c = std::min(ocol * factor + dc, cols - 1);
              acc = reduce(acc, read(r, c, ch));
            }
          }
          write(orow, ocol, ch, acc);
        }
      }
    }
  }
}

ImageF reduce_image(const ImageF& img, int factor, bool average) {
  check_factor(factor);
  if (factor == 1) return img;
  ImageF out(ceil_div(img.width(), factor), ceil_div(img.height(), factor), img.channels());
  block_reduce(
      img.height(), img.width(), img.channels(), factor,
      [&](int r, int c, int ch) { return img.at(r, c, ch); },
      [&](int r, int c, int ch, float v) { out.at(r, c, ch) = v; },
      [](float a, float b) { return std::min(a, b); }, INFINITY, average);
  return out;
}

}  // namespace

ImageF downsample_box(const ImageF& img, int factor) { return reduce_image(img, factor, true); }

ImageF min_pool(const ImageF& img, int factor) { return reduce_image(img, factor, false); }

EdgeMap min_pool(const EdgeMap& map, int factor) {
  check_factor(factor);
  if (factor == 1) return map;
  const int rows = static_cast<int>(map.rows());
  const int cols = static_cast<int>(map.cols());
  if (map.size() == 0) return EdgeMap(ceil_div(rows, factor), ceil_div(cols, factor));
  EdgeMap out(ceil_div(rows, factor), ceil_div(cols, factor));
  block_reduce(
      rows, cols, 1, factor, [&](int r, int c, int) { return map(r, c); },
      [&](int r, int c, int, float v) { out(r, c) = v; },
      [](float a, float b) { return std::min(a, b); }, INFINITY, false);
  return out;
}

ImageF upsample_bilinear(const ImageF& img, int factor) {
  if (factor < 1) {
    throw InvalidArgument("upsampling factor must be >= 1, got " + std::to_string(factor));
  }
  if (factor == 1) return img;
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  ImageF out(w * factor, h * factor, ch);

  // Source coordinate of output sample x is (x + 0.5) / factor - 0.5.
  struct Tap {
    int lo;
    int hi;
    float t;
  };
  auto taps = [factor](int out_len, int in_len) {
    std::vector<Tap> result(out_len);
    for (int x = 0; x < out_len; ++x) {
      const double src = (x + 0.5) / factor - 0.5;
      const double clamped = std::clamp(src, 0.0, static_cast<double>(in_len - 1));
      const int lo = static_cast<int>(std::floor(clamped));
      const int hi = std::min(lo + 1, in_len - 1);
      result[x] = {lo, hi, static_cast<float>(clamped - lo)};
    }
    return result;
  };
  const auto xs = taps(w * factor, w);
  const auto ys = taps(h * factor, h);

  for (int y = 0; y < h * factor; ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < w * factor; ++x) {
      const Tap& tx = xs[x];
      for (int c = 0; c < ch; ++c) {
        const float top = img.at(ty.lo, tx.lo, c) * (1.0f - tx.t) + img.at(ty.lo, tx.hi, c) * tx.t;
        const float bottom =
            img.at(ty.hi, tx.lo, c) * (1.0f - tx.t) + img.at(ty.hi, tx.hi, c) * tx.t;
        out.at(y, x, c) = top * (1.0f - ty.t) + bottom * ty.t;
      }
    }
  }
  return out;
}

ImageF crop(const ImageF& img, int width, int height) {
  if (width < 1 || height < 1 || width > img.width() || height > img.height()) {
    throw InvalidArgument("crop size out of range");
  }
  if (width == img.width() && height == img.height()) return img;
  ImageF out(width, height, img.channels());
  for (int r = 0; r < height; ++r) {
    const auto src = img.data().subspan(img.index(r, 0), static_cast<std::size_t>(width) * img.channels());
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(out.index(r, 0)));
  }
  return out;
}

ImageF multiply(const ImageF& a, const ImageF& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      (b.channels() != a.channels() && b.channels() != 1)) {
    throw DimensionMismatch("multiply: operand shapes differ");
  }
  ImageF out(a.width(), a.height(), a.channels());
  auto dst = out.data();
  const auto lhs = a.data();
  const auto rhs = b.data();
  if (b.channels() == a.channels()) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lhs[i] * rhs[i];
  } else {
    const auto ch = static_cast<std::size_t>(a.channels());
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lhs[i] * rhs[i / ch];
  }
  return out;
}

ImageF extract_channel(const ImageF& img, int channel) {
  if (channel < 0 || channel >= img.channels()) throw InvalidArgument("channel out of range");
  ImageF out(img.width(), img.height(), 1);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) out.at(r, c) = img.at(r, c, channel);
  return out;
}

ImageF broadcast_channels(const ImageF& gray, int channels) {
  if (gray.channels() != 1) throw InvalidArgument("broadcast_channels expects a single channel");
  ImageF out(gray.width(), gray.height(), channels);
  for (int r = 0; r < gray.height(); ++r)
    for (int c = 0; c < gray.width(); ++c)
      for (int k = 0; k < channels; ++k) out.at(r, c, k) = gray.at(r, c);
  return out;
}

bool all_finite(const ImageF& img) noexcept {
  return std::all_of(img.data().begin(), img.data().end(), [](float v) { return std::isfinite(v); });
}

}  // namespace relight
