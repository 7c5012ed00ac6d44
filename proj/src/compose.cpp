#include "relight/compose.hpp"

#include "relight/errors.hpp"

#include <algorithm>

namespace relight {

namespace {

bool in_unit_range(const ImageF& img) {
  return std::all_of(img.data().begin(), img.data().end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
}

bool same_extent(const ImageF& a, const ImageF& b) {
  return a.width() == b.width() && a.height() == b.height();
}

}  // namespace

void RelightInputs::validate() const {
  if (camera.channels() != 3 || filter.channels() != 3) {
    throw InvalidArgument("camera and filter must be 3-channel");
  }
  if (!same_extent(camera, filter)) throw DimensionMismatch("camera and filter sizes differ");
  if (shadow) {
    if (shadow->channels() != 1) throw InvalidArgument("shadow map must be single-channel");
    if (!same_extent(camera, *shadow)) throw DimensionMismatch("shadow map size differs from camera");
  }
  if (!in_unit_range(camera) || !in_unit_range(filter) || (shadow && !in_unit_range(*shadow))) {
    throw InvalidArgument("relight inputs must lie in [0,1]");
  }
}

void ShadowParams::validate() const {
  if (iterations < 1) throw InvalidArgument("shadow pass needs at least one iteration");
  DiffusionParams{lambda, iterations}.validate();
}

ImageF composite(const ImageF& filter, const ImageF& camera, const std::optional<ImageF>& shadow) {
  ImageF out = multiply(filter, camera);
  if (shadow) {
    if (shadow->channels() != 1 && shadow->channels() != out.channels()) {
      throw DimensionMismatch("shadow channels do not broadcast");
    }
    out = multiply(out, *shadow);
  }
  return out;
}

ImageF shadow_pass(const ImageF& shadow, const CoefficientField& coeffs, const ShadowParams& params) {
  params.validate();
  if (shadow.channels() != 1) throw InvalidArgument("shadow map must be single-channel");
  return run(shadow, coeffs, {params.lambda, params.iterations});
}

ImageF shadow_pass(const ImageF& shadow, const GuidanceField& guidance, const ShadowParams& params) {
  params.validate();
  if (shadow.channels() != 1) throw InvalidArgument("shadow map must be single-channel");
  if (!same_extent(shadow, guidance.features())) throw DimensionMismatch("shadow map size differs from guidance");
  return shadow_pass(shadow, build_coefficients(guidance), params);
}

ImageF relight(const RelightInputs& inputs, const CoefficientField& coeffs, const CascadeSchedule& schedule,
               const std::optional<ShadowParams>& shadow_params, CascadeStats* stats) {
  inputs.validate();
  if (coeffs.width() != inputs.camera.width() || coeffs.height() != inputs.camera.height()) {
    throw DimensionMismatch("guidance size differs from camera");
  }
  const ImageF refined = cascade(inputs.filter, coeffs, schedule, stats);
  std::optional<ImageF> shadow;
  if (inputs.shadow) {
    shadow = shadow_params ? shadow_pass(*inputs.shadow, coeffs, *shadow_params) : *inputs.shadow;
  }
  return composite(refined, inputs.camera, shadow);
}

ImageF relight(const RelightInputs& inputs, const GuidanceField& guidance, const CascadeSchedule& schedule,
               const std::optional<ShadowParams>& shadow_params) {
  inputs.validate();
  if (!same_extent(guidance.features(), inputs.camera)) throw DimensionMismatch("guidance size differs from camera");
  return relight(inputs, build_coefficients(guidance), schedule, shadow_params);
}

}  // namespace relight
