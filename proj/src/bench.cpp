#include "relight/bench.hpp"

#include "relight/errors.hpp"
#include "relight/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace relight {

GuidanceMode parse_guidance_mode(std::string_view name) {
  if (name == "rgb") return GuidanceMode::Rgb;
  if (name == "synthetic") return GuidanceMode::Synthetic;
  throw InvalidArgument("unknown guidance mode '" + std::string(name) + "'");
}

Aggregate aggregate(std::vector<double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return {sum / static_cast<double>(n), median};
}

namespace {

template <typename Field>
Aggregate column(const std::vector<MetricRow>& rows, Field field) {
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) values.push_back(row.*field);
  return aggregate(std::move(values));
}

using Clock = std::chrono::steady_clock;

}  // namespace

Aggregate MetricReport::psnr_raw() const { return column(rows, &MetricRow::psnr_raw); }
Aggregate MetricReport::psnr_refined() const { return column(rows, &MetricRow::psnr_refined); }
Aggregate MetricReport::ssim_raw() const { return column(rows, &MetricRow::ssim_raw); }
Aggregate MetricReport::ssim_refined() const { return column(rows, &MetricRow::ssim_refined); }
Aggregate MetricReport::time_ms() const { return column(rows, &MetricRow::time_ms); }

double MetricReport::refined_win_rate() const {
  if (rows.empty()) return 0.0;
  const auto wins = std::count_if(rows.begin(), rows.end(), [](const MetricRow& r) { return r.psnr_refined > r.psnr_raw; });
  return static_cast<double>(wins) / static_cast<double>(rows.size());
}

double median_time_ms(const std::function<void()>& fn, int repetitions) {
  fn();
  std::vector<double> times;
  for (int i = 0; i < std::max(1, repetitions); ++i) {
    const auto start = Clock::now();
    fn();
    times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
  }
  return aggregate(std::move(times)).median;
}

MetricReport run_benchmark(const BenchmarkConfig& config) {
  const auto scenes = benchmark_suite(config.kind, config.count, config.seed, config.resolution);
  MetricReport report;
  report.benchmark = std::string(to_string(config.kind));
  const bool camera_target = config.kind == BenchmarkKind::MultiLighting;
  report.target = camera_target ? "camera" : "ground-truth-composite";

  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const RenderOutput frame = render(scenes[i]);
    ErrorModel errors = config.errors;
    errors.noise_seed = config.errors.noise_seed + i;
    const ImageF corrupted = corrupt(frame.filter, frame.depth, errors);
    const GuidanceField guidance = config.guidance == GuidanceMode::Rgb
                                       ? rgb_guidance(frame.camera, config.schedule.kappa())
                                       : synthetic_features(frame, config.schedule.kappa());
    const RelightInputs inputs{frame.camera, corrupted, std::nullopt};

    ImageF refined;
    auto refine = [&] { refined = relight(inputs, guidance, config.schedule); };
    const double ms = config.timing_repetitions > 1 ? median_time_ms(refine, config.timing_repetitions) : [&] {
      const auto start = Clock::now();
      refine();
      return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }();

    const ImageF raw = composite(corrupted, frame.camera);
    const ImageF target = camera_target ? frame.camera : composite(frame.filter, frame.camera);
    report.rows.push_back({static_cast<int>(i), psnr(raw, target), psnr(refined, target), ssim(raw, target),
                           ssim(refined, target), ms});
  }
  return report;
}

namespace {

std::string fmt(double v, int precision = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const MetricReport& report) {
  out << kCsvHeader << '\n';
  for (const auto& row : report.rows) {
    out << report.benchmark << ',' << row.scene_id << ',' << fmt(row.psnr_raw) << ',' << fmt(row.psnr_refined) << ','
        << fmt(row.ssim_raw) << ',' << fmt(row.ssim_refined) << ',' << fmt(row.time_ms, 3) << '\n';
  }
}

void print_report(std::ostream& out, const MetricReport& report) {
  const auto line = [&](const char* name, const Aggregate& raw, const Aggregate& refined) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-6s %12s %12s %12s %12s\n", name, fmt(raw.mean, 4).c_str(),
                  fmt(refined.mean, 4).c_str(), fmt(raw.median, 4).c_str(), fmt(refined.median, 4).c_str());
    out << buf;
  };
  out << "benchmark: " << report.benchmark << " (" << report.rows.size() << " scenes, target: " << report.target
      << ")\n";
  out << "  SSIM substitutes for LPIPS as the structural metric.\n";
  char head[160];
  std::snprintf(head, sizeof(head), "  %-6s %12s %12s %12s %12s\n", "metric", "raw mean", "refined mean", "raw median",
                "refined med");
  out << head;
  line("PSNR", report.psnr_raw(), report.psnr_refined());
  line("SSIM", report.ssim_raw(), report.ssim_refined());
  const Aggregate t = report.time_ms();
  out << "  refine time ms: mean " << fmt(t.mean, 3) << ", median " << fmt(t.median, 3) << "\n";
  out << "  refined wins (PSNR): " << fmt(100.0 * report.refined_win_rate(), 1) << "%\n";
}

RelightInputs speed_ablation_input(std::uint64_t seed, int resolution) {
  const auto scenes = benchmark_suite(BenchmarkKind::Fidelity, 1, seed, resolution);
  const RenderOutput frame = render(scenes.front());
  return {frame.camera, corrupt(frame.filter, frame.depth, ErrorModel::defaults()), std::nullopt};
}

SpeedAblation run_speed_ablation(const RelightInputs& input, const GuidanceField& guidance, int repetitions) {
  input.validate();
  struct Config {
    const char* name;
    std::string_view schedule;
  };
  const Config configs[] = {{"cascaded", kSpeedCascaded}, {"naive-50", kSpeedNaive50}, {"naive-1000", kSpeedNaive1000}};

  SpeedAblation result;
  std::vector<ImageF> filters;
  for (const auto& config : configs) {
    const CascadeSchedule schedule = CascadeSchedule::parse(config.schedule, kDefaultLambda, guidance.kappa());
    ImageF refined;
    CascadeStats stats;
    // Timed region covers coefficient construction, so every configuration
    // pays for the full-resolution field.
    const double ms = median_time_ms(
        [&] { refined = cascade(input.filter, guidance, schedule, &stats); }, repetitions);
    SpeedRow row;
    row.name = config.name;
    row.schedule = schedule.to_string();
    row.steps = schedule.total_steps();
    row.time_ms = ms;
    row.diffusion_ms = stats.diffusion_ms;
    row.resample_ms = stats.resample_ms;
    result.rows.push_back(row);
    filters.push_back(std::move(refined));
  }
  const ImageF& ref_filter = filters.back();
  const ImageF ref_frame = composite(ref_filter, input.camera);
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    result.rows[i].ssim_filter = ssim(filters[i], ref_filter);
    result.rows[i].ssim_composite = ssim(composite(filters[i], input.camera), ref_frame);
  }
  return result;
}

void print_speed_ablation(std::ostream& out, const SpeedAblation& ablation) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-11s %-22s %6s %11s %11s %11s %12s %14s\n", "config", "schedule", "steps",
                "total ms", "diffuse ms", "resample ms", "ssim filter", "ssim relit");
  out << buf;
  for (const auto& row : ablation.rows) {
    std::snprintf(buf, sizeof(buf), "%-11s %-22s %6d %11.2f %11.2f %11.2f %12.4f %14.4f\n", row.name.c_str(),
                  row.schedule.c_str(), row.steps, row.time_ms, row.diffusion_ms, row.resample_ms, row.ssim_filter,
                  row.ssim_composite);
    out << buf;
  }
  out << "reference: naive-1000; speedup of cascaded: "
      << fmt(ablation.reference().time_ms / ablation.cascaded().time_ms, 1) << "x\n";
}

ShadowSweep run_shadow_sweep(int resolution, float kappa) {
  const RenderOutput frame = render(flat_wall_scene(resolution));
  const GuidanceField guidance = rgb_guidance(frame.camera, kappa);
  const CoefficientField coeffs = build_coefficients(guidance);
  ShadowSweep sweep;
  for (int iterations = 1; iterations <= 10; ++iterations) {
    const ImageF soft = shadow_pass(frame.shadow, coeffs, ShadowParams{iterations, kDefaultLambda});
    sweep.shadow_pass.push_back({iterations, region_iou(soft, frame.shadow)});
  }
  const ImageF through_cascade =
      cascade(frame.shadow, coeffs, CascadeSchedule::parse(kDefaultSchedule, kDefaultLambda, kappa));
  sweep.cascade_iou = region_iou(through_cascade, frame.shadow);
  return sweep;
}

}  // namespace relight
