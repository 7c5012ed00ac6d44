#pragma once

#include "relight/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace relight {

/// Sensitivity for features in [0,1]: a 0.1 step per RGB channel gives a
/// coefficient near 0.03 while sensor-noise differences stay above 0.97.
inline constexpr float kDefaultKappa = 0.03f;

/// Per-pixel feature vectors plus the edge sensitivity kappa.
class GuidanceField {
 public:
  GuidanceField(ImageF features, float kappa);

  const ImageF& features() const noexcept { return features_; }
  float kappa() const noexcept { return kappa_; }
  int width() const noexcept { return features_.width(); }
  int height() const noexcept { return features_.height(); }

 private:
  ImageF features_;
  float kappa_;
};

/// Conductance of each 4-neighbourhood edge.
///
/// horizontal(r, c) joins pixels (r, c) and (r, c+1) and is height x (width-1);
/// vertical(r, c) joins (r, c) and (r+1, c) and is (height-1) x width. One
/// value per undirected edge, so the field is symmetric by construction.
struct CoefficientField {
  EdgeMap horizontal;
  EdgeMap vertical;

  int width() const noexcept { return static_cast<int>(vertical.cols()); }
  int height() const noexcept { return static_cast<int>(horizontal.rows()); }

  /// Field over a width x height image with every edge set to value.
  static CoefficientField uniform(int width, int height, float value);
};

/// kappa^2 / (kappa^2 + |gp - gn|^2). Evaluated in double and rounded once,
/// so the result is bit-identical under argument swap. Never returns 0.
float coefficient(std::span<const float> gp, std::span<const float> gn, float kappa);

CoefficientField build_coefficients(const GuidanceField& guidance);

/// Camera pixels used directly as 3-vector features.
GuidanceField rgb_guidance(const ImageF& camera, float kappa = kDefaultKappa);

// GADF feature-map files: "GADF" | u32 version=1 | u32 height | u32 width |
// u32 channels | f32 kappa | f32 payload, little-endian, channel-fastest.
std::vector<std::uint8_t> encode_feature_map(const GuidanceField& guidance);
GuidanceField decode_feature_map(std::span<const std::uint8_t> bytes);
void save_feature_map(const std::filesystem::path& path, const GuidanceField& guidance);
GuidanceField load_feature_map(const std::filesystem::path& path);

}  // namespace relight
