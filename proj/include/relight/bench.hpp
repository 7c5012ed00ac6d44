#pragma once

#include "relight/compose.hpp"
#include "relight/diffusion.hpp"
#include "relight/scene.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace relight {

enum class GuidanceMode {
  Rgb,        ///< camera pixels
  Synthetic,  ///< albedo + log-depth features (learned-extractor stand-in)
};

GuidanceMode parse_guidance_mode(std::string_view name);

/// Benchmark schedule for 256x256 suites. Its last level runs at full
/// resolution, so silhouettes are not blurred by a final upsample.
inline constexpr std::string_view kBenchmarkSchedule = "2:10,1:30";

struct BenchmarkConfig {
  BenchmarkKind kind = BenchmarkKind::MeshErrorCorrection;
  int count = 50;
  std::uint64_t seed = 0;
  int resolution = 256;
  CascadeSchedule schedule = CascadeSchedule::parse(kBenchmarkSchedule);
  GuidanceMode guidance = GuidanceMode::Rgb;
  ErrorModel errors = ErrorModel::defaults();
  int timing_repetitions = 1;
};

struct MetricRow {
  int scene_id = 0;
  double psnr_raw = 0.0;
  double psnr_refined = 0.0;
  double ssim_raw = 0.0;
  double ssim_refined = 0.0;
  double time_ms = 0.0;  ///< refinement (cascade + composite) wall-clock
};

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
};

Aggregate aggregate(std::vector<double> values);

/// Rows ordered by scene id. Mesh-error-correction and fidelity compare
/// against the composite of the uncorrupted filter; multi-lighting compares
/// against the camera frame.
struct MetricReport {
  std::string benchmark;
  std::string target;
  std::vector<MetricRow> rows;

  Aggregate psnr_raw() const;
  Aggregate psnr_refined() const;
  Aggregate ssim_raw() const;
  Aggregate ssim_refined() const;
  Aggregate time_ms() const;
  /// Fraction of scenes where refined PSNR beats raw PSNR.
  double refined_win_rate() const;
};

MetricReport run_benchmark(const BenchmarkConfig& config);

inline constexpr std::string_view kCsvHeader = "benchmark,scene_id,psnr_raw,psnr_refined,ssim_raw,ssim_refined,time_ms";

void write_csv(std::ostream& out, const MetricReport& report);
void print_report(std::ostream& out, const MetricReport& report);

/// Median wall-clock of `repetitions` calls after one discarded warm-up call.
double median_time_ms(const std::function<void()>& fn, int repetitions = 5);

struct SpeedRow {
  std::string name;
  std::string schedule;
  int steps = 0;
  double time_ms = 0.0;
  double diffusion_ms = 0.0;
  double resample_ms = 0.0;
  double ssim_filter = 1.0;     ///< refined filter vs reference refined filter
  double ssim_composite = 1.0;  ///< relit frame vs reference relit frame
};

/// The cascaded schedule against 50 and 1000 steps at half resolution.
struct SpeedAblation {
  std::vector<SpeedRow> rows;  ///< cascaded, naive-50, naive-1000 (reference)
  const SpeedRow& cascaded() const { return rows.at(0); }
  const SpeedRow& naive50() const { return rows.at(1); }
  const SpeedRow& reference() const { return rows.at(2); }
};

inline constexpr std::string_view kSpeedCascaded = "16:5,8:10,4:15,2:20";
inline constexpr std::string_view kSpeedNaive50 = "2:50";
inline constexpr std::string_view kSpeedNaive1000 = "2:1000";

/// Corrupted 512x512 fidelity-suite frame used as the ablation input.
RelightInputs speed_ablation_input(std::uint64_t seed, int resolution = 512);

SpeedAblation run_speed_ablation(const RelightInputs& input, const GuidanceField& guidance, int repetitions = 5);
void print_speed_ablation(std::ostream& out, const SpeedAblation& ablation);

struct ShadowSweepRow {
  int iterations = 0;
  double iou = 0.0;
};

struct ShadowSweep {
  std::vector<ShadowSweepRow> shadow_pass;  ///< iterations 1..10
  double cascade_iou = 0.0;                 ///< shadow pushed through the default cascade
};

ShadowSweep run_shadow_sweep(int resolution = 256, float kappa = kDefaultKappa);

}  // namespace relight
