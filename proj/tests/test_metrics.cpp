#include "relight/bench.hpp"
#include "relight/errors.hpp"
#include "relight/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace relight;

namespace {

ImageF random_image(int w, int h, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  ImageF img(w, h, c);
  for (float& v : img.data()) v = dist(rng);
  return img;
}

}  // namespace

TEST_CASE("psnr of identical images is infinite") {
  const ImageF a = random_image(8, 8, 3, 1);
  CHECK(std::isinf(psnr(a, a)));
}

TEST_CASE("psnr for constant offsets") {
  CHECK(psnr(ImageF(8, 8, 3, 0.2f), ImageF(8, 8, 3, 0.3f)) == doctest::Approx(20.0).epsilon(1e-5));
  CHECK(psnr(ImageF(8, 8, 3, 0.0f), ImageF(8, 8, 3, 0.5f)) == doctest::Approx(6.020599913279624).epsilon(1e-9));
  CHECK_THROWS_AS(psnr(ImageF(8, 8, 3), ImageF(8, 8, 1)), DimensionMismatch);
}

TEST_CASE("psnr strictly decreases as noise amplitude grows") {
  const ImageF base(32, 32, 3, 0.5f);
  double previous = std::numeric_limits<double>::infinity();
  for (float amp : {0.01f, 0.05f, 0.1f, 0.2f, 0.4f}) {
    ImageF noisy = base;
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (float& v : noisy.data()) v += amp * dist(rng);
    const double p = psnr(noisy, base);
    CHECK(p < previous);
    previous = p;
  }
}

TEST_CASE("ssim of an image with itself is one and ssim is symmetric") {
  const ImageF a = random_image(24, 20, 3, 4);
  const ImageF b = random_image(24, 20, 3, 5);
  CHECK(ssim(a, a) == doctest::Approx(1.0));
  CHECK(ssim(a, b) == ssim(b, a));
}

TEST_CASE("ssim of two constants matches the zero-variance closed form") {
  // (2*0.5*0.6 + C1) / (0.5^2 + 0.6^2 + C1) with C1 = 1e-4; the C2 factors cancel.
  CHECK(ssim(ImageF(16, 16, 1, 0.5f), ImageF(16, 16, 1, 0.6f)) == doctest::Approx(0.983609244386166).epsilon(1e-6));
}

TEST_CASE("ssim is consistent under identical flips of both images") {
  const ImageF a = random_image(22, 22, 1, 6);
  const ImageF b = random_image(22, 22, 1, 7);
  auto flip = [](const ImageF& img) {
    ImageF out(img.width(), img.height(), img.channels());
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) out.at(r, img.width() - 1 - c) = img.at(r, c);
    }
    return out;
  };
  CHECK(ssim(flip(a), flip(b)) == doctest::Approx(ssim(a, b)).epsilon(1e-9));
}

TEST_CASE("ssim rejects images smaller than its window") {
  CHECK_THROWS_AS(ssim(ImageF(10, 10, 1), ImageF(10, 10, 1)), InvalidArgument);
}

TEST_CASE("region_iou compares below-threshold regions") {
  ImageF a(4, 1, 1, {0.0f, 0.0f, 1.0f, 1.0f});
  ImageF b(4, 1, 1, {0.0f, 1.0f, 1.0f, 1.0f});
  CHECK(region_iou(a, b) == doctest::Approx(0.5));
  CHECK(region_iou(a, a) == 1.0);
}

TEST_CASE("aggregate gives mean and median") {
  const Aggregate a = aggregate({3.0, 1.0, 2.0, 10.0});
  CHECK(a.mean == 4.0);
  CHECK(a.median == 2.5);
}

TEST_CASE("run_benchmark rows are deterministic and aggregates match them") {
  BenchmarkConfig config;
  config.count = 3;
  config.resolution = 64;
  config.seed = 11;
  const MetricReport a = run_benchmark(config);
  const MetricReport b = run_benchmark(config);
  REQUIRE(a.rows.size() == 3);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].scene_id == static_cast<int>(i));
    CHECK(a.rows[i].psnr_refined == b.rows[i].psnr_refined);
    CHECK(a.rows[i].ssim_raw == b.rows[i].ssim_raw);
    CHECK(a.rows[i].time_ms > 0.0);
    sum += a.rows[i].psnr_raw;
  }
  CHECK(a.psnr_raw().mean == doctest::Approx(sum / 3.0));
}

TEST_CASE("with no corruption the refined frame is at most slightly worse") {
  BenchmarkConfig config;
  config.kind = BenchmarkKind::MultiLighting;
  config.count = 4;
  config.resolution = 96;
  config.errors = ErrorModel{};
  const MetricReport report = run_benchmark(config);
  for (const auto& row : report.rows) CHECK(row.psnr_refined >= row.psnr_raw - 0.5);
}

TEST_CASE("the benchmark CSV has the fixed header and one row per scene") {
  BenchmarkConfig config;
  config.count = 2;
  config.resolution = 48;
  std::ostringstream out;
  write_csv(out, run_benchmark(config));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "benchmark,scene_id,psnr_raw,psnr_refined,ssim_raw,ssim_refined,time_ms");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind("mesh-error-correction,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("the cascaded speed schedule sums to 50 steps") {
  CHECK(CascadeSchedule::parse(kSpeedCascaded).total_steps() == 50);
  CHECK(CascadeSchedule::parse(kSpeedNaive50).total_steps() == 50);
  CHECK(CascadeSchedule::parse(kSpeedNaive1000).total_steps() == 1000);
}
