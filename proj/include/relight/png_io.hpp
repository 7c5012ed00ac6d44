#pragma once

#include "relight/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace relight {

/// Decoded PNG plus the bit depth it was stored with (8 or 16).
struct PngImage {
  ImageF image;
  int bit_depth = 8;
};

/// Sample codes are mapped to value / (2^depth - 1); no gamma transform.
/// Gray, RGB, palette and alpha variants are accepted; alpha is dropped.
PngImage decode_png(std::span<const std::uint8_t> bytes);
PngImage read_png(const std::filesystem::path& path);

/// Writes 1- or 3-channel images at bit depth 8 or 16. Values are clamped to
/// [0,1] and rounded to the nearest code. Output carries no timestamp or
/// gamma chunks, so encoding is byte-deterministic.
std::vector<std::uint8_t> encode_png(const ImageF& img, int bit_depth = 8);
void write_png(const std::filesystem::path& path, const ImageF& img, int bit_depth = 8);

/// The value a sample decodes to after a write/read cycle at bit_depth.
float quantize(float value, int bit_depth) noexcept;
ImageF quantize(const ImageF& img, int bit_depth);

}  // namespace relight
