#include "relight/diffusion.hpp"
#include "relight/errors.hpp"
#include "relight/parallel.hpp"

#include <doctest.h>

#include <random>

using namespace relight;

namespace {

ImageF random_image(int w, int h, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  ImageF img(w, h, c);
  for (float& v : img.data()) v = dist(rng);
  return img;
}

double channel_sum(const ImageF& img, int ch) {
  double s = 0.0;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) s += img.at(r, c, ch);
  }
  return s;
}

}  // namespace

TEST_CASE("step leaves a constant image unchanged") {
  const ImageF img(7, 5, 3, 0.42f);
  const CoefficientField coeffs = build_coefficients(GuidanceField(random_image(7, 5, 3, 1), 0.1f));
  CHECK(step(img, coeffs, 0.24f) == img);
}

TEST_CASE("step with zero coefficients is the identity") {
  const ImageF img = random_image(6, 6, 2, 2);
  CHECK(step(img, CoefficientField::uniform(6, 6, 0.0f), 0.2f) == img);
}

TEST_CASE("step on a two-pixel image moves each value by lambda times the difference") {
  const ImageF out = step(ImageF(2, 1, 1, {0.0f, 1.0f}), CoefficientField::uniform(2, 1, 1.0f), 0.2f);
  CHECK(out.at(0, 0) == doctest::Approx(0.2f));
  CHECK(out.at(0, 1) == doctest::Approx(0.8f));
}

TEST_CASE("step rejects lambda outside (0, 0.25) and mismatched coefficients") {
  const ImageF img(4, 4, 1);
  const CoefficientField ones = CoefficientField::uniform(4, 4, 1.0f);
  CHECK_THROWS_AS(step(img, ones, 0.25f), InvalidArgument);
  CHECK_THROWS_AS(step(img, ones, 0.0f), InvalidArgument);
  CHECK_THROWS_AS(step(img, CoefficientField::uniform(5, 4, 1.0f), 0.2f), DimensionMismatch);
}

TEST_CASE("step on a single pixel returns it") {
  const ImageF px(1, 1, 3, {0.1f, 0.2f, 0.3f});
  CHECK(step(px, CoefficientField::uniform(1, 1, 1.0f), 0.24f) == px);
}

TEST_CASE("run with zero iterations returns the input") {
  const ImageF img = random_image(5, 5, 3, 3);
  CHECK(run(img, CoefficientField::uniform(5, 5, 1.0f), {0.24f, 0}) == img);
  CHECK_THROWS_AS(run(img, CoefficientField::uniform(5, 5, 1.0f), {0.24f, -1}), InvalidArgument);
}

TEST_CASE("run bit-matches reference_run on a 16x16 instance") {
  const ImageF y0 = random_image(16, 16, 3, 4);
  const GuidanceField g(random_image(16, 16, 3, 5), 0.2f);
  CHECK(run(y0, build_coefficients(g), {0.24f, 50}) == reference_run(y0, g, {0.24f, 50}));
}

TEST_CASE("run is identical for every thread count") {
  const ImageF y0 = random_image(300, 260, 3, 6);
  const CoefficientField coeffs = build_coefficients(GuidanceField(random_image(300, 260, 3, 7), 0.05f));
  parallel::set_thread_count(1);
  const ImageF serial = run(y0, coeffs, {0.24f, 5});
  parallel::set_thread_count(4);
  const ImageF threaded = run(y0, coeffs, {0.24f, 5});
  parallel::set_thread_count(0);
  CHECK(serial == threaded);
}

TEST_CASE("reference_run keeps constants and the unit range") {
  const GuidanceField g(random_image(8, 8, 3, 8), 0.05f);
  const ImageF constant(8, 8, 1, 0.6f);
  CHECK(reference_run(constant, g, {0.24f, 10}) == constant);
  const ImageF diffused = reference_run(random_image(8, 8, 1, 9), g, {0.24f, 20});
  for (float v : diffused.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("no value crosses a closed contour of zero coefficients") {
  // A 4x4 square in the middle of a 10x10 image is walled off.
  const int n = 10;
  CoefficientField coeffs = CoefficientField::uniform(n, n, 1.0f);
  for (int r = 3; r <= 6; ++r) {
    coeffs.horizontal(r, 2) = 0.0f;
    coeffs.horizontal(r, 6) = 0.0f;
  }
  for (int c = 3; c <= 6; ++c) {
    coeffs.vertical(2, c) = 0.0f;
    coeffs.vertical(6, c) = 0.0f;
  }
  const ImageF y0 = random_image(n, n, 1, 10);
  const ImageF y = run(y0, coeffs, {0.24f, 200});
  auto inside_sum = [](const ImageF& img) {
    double s = 0.0;
    for (int r = 3; r <= 6; ++r) {
      for (int c = 3; c <= 6; ++c) s += img.at(r, c);
    }
    return s;
  };
  CHECK(inside_sum(y) == doctest::Approx(inside_sum(y0)).epsilon(1e-6));
  CHECK(channel_sum(y, 0) - inside_sum(y) == doctest::Approx(channel_sum(y0, 0) - inside_sum(y0)).epsilon(1e-6));
}

TEST_CASE("CascadeSchedule parses, validates and prints") {
  const CascadeSchedule s = CascadeSchedule::parse(kDefaultSchedule);
  REQUIRE(s.levels().size() == 4);
  CHECK(s.levels()[0] == CascadeLevel{16, 10});
  CHECK(s.levels()[3] == CascadeLevel{2, 30});
  CHECK(s.total_steps() == 80);
  CHECK(s.to_string() == kDefaultSchedule);
  CHECK_THROWS_AS(CascadeSchedule::parse("4:0,2:10"), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse("3:10"), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse("2:10,4:10"), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse("2:10,2:10"), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse(""), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse("4:10,"), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse("4:x"), InvalidArgument);
  CHECK_THROWS_AS(CascadeSchedule::parse("4:10", 0.3f), InvalidArgument);
}

TEST_CASE("a single full-resolution level equals run") {
  const ImageF y0 = random_image(20, 12, 3, 11);
  const GuidanceField g(random_image(20, 12, 3, 12), 0.1f);
  const ImageF via_cascade = cascade(y0, g, CascadeSchedule::parse("1:25", 0.24f, 0.1f));
  CHECK(via_cascade == run(y0, build_coefficients(g), {0.24f, 25}));
}

TEST_CASE("the default schedule on 512x512 runs 80 steps and none at full resolution") {
  const ImageF y0 = random_image(512, 512, 1, 13);
  const GuidanceField g(random_image(512, 512, 3, 14), 0.03f);
  CascadeStats stats;
  const ImageF out = cascade(y0, g, CascadeSchedule::parse(kDefaultSchedule), &stats);
  CHECK(out.width() == 512);
  CHECK(out.height() == 512);
  CHECK(stats.total_steps == 80);
  CHECK(stats.full_resolution_steps == 0);
  REQUIRE(stats.levels.size() == 4);
  CHECK(stats.levels[0].width == 32);
  CHECK(stats.levels[1].width == 64);
  CHECK(stats.levels[2].width == 128);
  CHECK(stats.levels[3].width == 256);
}

TEST_CASE("cascade handles sizes that are not multiples of the divisor") {
  const ImageF y0(37, 23, 3, 0.3f);
  const GuidanceField g(random_image(37, 23, 3, 15), 0.03f);
  const ImageF out = cascade(y0, g, CascadeSchedule::parse("8:3,2:3"));
  CHECK(out.width() == 37);
  CHECK(out.height() == 23);
  for (float v : out.data()) CHECK(v == doctest::Approx(0.3f));
}

TEST_CASE("pooled coefficients are block minima of the full field") {
  const CoefficientField full = build_coefficients(GuidanceField(random_image(8, 8, 3, 16), 0.2f));
  const CoefficientField pooled = pool_coefficients(full, 4);
  REQUIRE(pooled.width() == 2);
  REQUIRE(pooled.height() == 2);
  // Coarse horizontal edge (R, 0) stands for full edges in rows 4R..4R+3, columns 0..3.
  for (int R = 0; R < 2; ++R) {
    float m = 1.0f;
    for (int r = 4 * R; r < 4 * R + 4; ++r) {
      for (int c = 0; c < 4; ++c) m = std::min(m, full.horizontal(r, c));
    }
    CHECK(pooled.horizontal(R, 0) == m);
  }
}

TEST_CASE("cascade rejects guidance of a different size") {
  const GuidanceField g(random_image(8, 8, 3, 17), 0.03f);
  CHECK_THROWS_AS(cascade(ImageF(9, 8, 1), g, CascadeSchedule::parse("2:1")), DimensionMismatch);
}
