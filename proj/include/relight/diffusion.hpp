#pragma once

#include "relight/guidance.hpp"
#include "relight/image.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace relight {

/// Step size close to the 4-neighbourhood stability bound of 1/4.
inline constexpr float kDefaultLambda = 0.24f;

/// Step size and iteration count for a fixed-resolution run.
struct DiffusionParams {
  float lambda = kDefaultLambda;
  int iterations = 0;

  /// Throws InvalidArgument unless 0 < lambda < 0.25 and iterations >= 0.
  void validate() const;
};

struct CascadeLevel {
  int divisor = 1;     ///< level resolution is ceil(full / divisor)
  int iterations = 1;  ///< diffusion steps run at this level

  friend bool operator==(const CascadeLevel&, const CascadeLevel&) = default;
};

/// Coarse-to-fine level list. Divisors are powers of two, strictly decreasing;
/// every level runs at least one step. kappa is the sensitivity used when a
/// caller builds guidance for this schedule; the cascade itself reads kappa
/// from the guidance field it is given.
class CascadeSchedule {
 public:
  CascadeSchedule(std::vector<CascadeLevel> levels, float lambda = kDefaultLambda,
                  float kappa = kDefaultKappa);

  /// Parses "divisor:iterations" pairs separated by commas, e.g.
  /// "16:10,8:15,4:25,2:30".
  static CascadeSchedule parse(std::string_view text, float lambda = kDefaultLambda,
                               float kappa = kDefaultKappa);

  const std::vector<CascadeLevel>& levels() const noexcept { return levels_; }
  float lambda() const noexcept { return lambda_; }
  float kappa() const noexcept { return kappa_; }
  int total_steps() const noexcept;
  std::string to_string() const;

 private:
  std::vector<CascadeLevel> levels_;
  float lambda_;
  float kappa_;
};

/// Default schedule: 10/15/25/30 steps at 1/16, 1/8, 1/4 and 1/2 resolution.
inline constexpr std::string_view kDefaultSchedule = "16:10,8:15,4:25,2:30";

/// One synchronous explicit update:
///   y'(p) = y(p) + lambda * sum_n (y(n) - y(p)) * c(p, n)
/// over the existing 4-neighbours of p (no-flux borders). All reads come from
/// the input buffer; every channel diffuses under the same coefficients.
/// Accumulation is in double with one rounding per sample.
ImageF step(const ImageF& y, const CoefficientField& coeffs, float lambda);

/// params.iterations consecutive steps.
ImageF run(const ImageF& y0, const CoefficientField& coeffs, const DiffusionParams& params);

/// Straight nested-loop implementation of run(build_coefficients(g), ...) that
/// recomputes every coefficient inline. Used as a correctness oracle.
ImageF reference_run(const ImageF& y0, const GuidanceField& guidance, const DiffusionParams& params);

/// Edge coefficients for a level at 1/divisor resolution: block minimum of the
/// full-resolution field, so an edge anywhere in a block blocks that block.
CoefficientField pool_coefficients(const CoefficientField& full, int divisor);

struct CascadeLevelStats {
  int divisor = 1;
  int width = 0;
  int height = 0;
  int iterations = 0;
};

struct CascadeStats {
  std::vector<CascadeLevelStats> levels;
  int total_steps = 0;
  int full_resolution_steps = 0;
  double coefficient_ms = 0.0;
  double diffusion_ms = 0.0;
  double resample_ms = 0.0;
};

/// Coarse-to-fine diffusion: box-downsample y0 to the coarsest level, then at
/// each level run its iterations under pooled coefficients and bilinearly
/// upsample to the next level. If the last divisor exceeds 1 the result is
/// upsampled to full resolution without further steps.
ImageF cascade(const ImageF& y0, const GuidanceField& guidance, const CascadeSchedule& schedule,
               CascadeStats* stats = nullptr);

/// Same, reusing a precomputed full-resolution coefficient field.
ImageF cascade(const ImageF& y0, const CoefficientField& full, const CascadeSchedule& schedule,
               CascadeStats* stats = nullptr);

}  // namespace relight
