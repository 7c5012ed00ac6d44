#pragma once

#include "relight/image.hpp"

namespace relight {

/// 10 log10(peak^2 / MSE) over all samples; +infinity for identical images.
double psnr(const ImageF& a, const ImageF& b, double peak = 1.0);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), k1 = 0.01, k2 = 0.03,
/// peak 1. Windows are evaluated only where they fit inside the image; the
/// per-channel means are averaged.
double ssim(const ImageF& a, const ImageF& b);

/// Intersection over union of the regions where the images fall below
/// threshold. Two empty regions give 1.
double region_iou(const ImageF& a, const ImageF& b, float threshold = 0.5f);

}  // namespace relight
