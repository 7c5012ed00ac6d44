#pragma once

#include "relight/diffusion.hpp"
#include "relight/guidance.hpp"
#include "relight/image.hpp"

#include <optional>

namespace relight {

/// Camera frame C, relight filter R and an optional single-channel shadow
/// attenuation (1 = unshadowed). All samples in [0,1], equal sizes.
struct RelightInputs {
  ImageF camera;
  ImageF filter;
  std::optional<ImageF> shadow;

  void validate() const;
};

/// Few full-resolution iterations: enough to soften a hard shadow edge
/// without moving its outline.
struct ShadowParams {
  int iterations = 3;
  float lambda = kDefaultLambda;
  static constexpr bool full_resolution = true;

  void validate() const;
};

/// filter * camera, then * shadow (broadcast) when present.
ImageF composite(const ImageF& filter, const ImageF& camera, const std::optional<ImageF>& shadow = std::nullopt);

ImageF shadow_pass(const ImageF& shadow, const GuidanceField& guidance, const ShadowParams& params);
ImageF shadow_pass(const ImageF& shadow, const CoefficientField& coeffs, const ShadowParams& params);

/// Refines the filter with the cascade and composites it with the camera.
/// A present shadow goes through shadow_pass when shadow_params is set and is
/// multiplied in unrefined otherwise.
ImageF relight(const RelightInputs& inputs, const GuidanceField& guidance, const CascadeSchedule& schedule,
               const std::optional<ShadowParams>& shadow_params = std::nullopt);
ImageF relight(const RelightInputs& inputs, const CoefficientField& coeffs, const CascadeSchedule& schedule,
               const std::optional<ShadowParams>& shadow_params = std::nullopt,
               CascadeStats* stats = nullptr);

}  // namespace relight
