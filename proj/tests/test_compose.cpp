#include "relight/compose.hpp"
#include "relight/errors.hpp"
#include "relight/metrics.hpp"
#include "relight/scene.hpp"

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

}  // namespace

TEST_CASE("composite multiplies filter, camera and shadow") {
  const ImageF out = composite(ImageF(2, 2, 3, 0.5f), ImageF(2, 2, 3, 0.8f), ImageF(2, 2, 1, 0.5f));
  for (float v : out.data()) CHECK(v == doctest::Approx(0.2f));
}

TEST_CASE("composite is commutative in filter and camera") {
  const ImageF a = random_image(6, 4, 3, 1);
  const ImageF b = random_image(6, 4, 3, 2);
  CHECK(composite(a, b) == composite(b, a));
}

TEST_CASE("composite follows the multiply identity and zero cases") {
  const ImageF camera = random_image(5, 5, 3, 3);
  CHECK(composite(ImageF(5, 5, 3, 1.0f), camera) == camera);
  const ImageF zero = composite(ImageF(5, 5, 3, 0.0f), camera);
  for (float v : zero.data()) CHECK(v == 0.0f);
  CHECK_THROWS_AS(composite(ImageF(4, 5, 3), camera), DimensionMismatch);
}

TEST_CASE("relight with a white filter returns the camera exactly") {
  const ImageF camera = random_image(40, 24, 3, 4);
  for (const char* schedule : {"16:10,8:15,4:25,2:30", "2:5", "1:3"}) {
    const ImageF out = relight::relight({camera, ImageF(40, 24, 3, 1.0f), std::nullopt}, rgb_guidance(camera),
                               CascadeSchedule::parse(schedule));
    CHECK(out == camera);
  }
}

TEST_CASE("relight with a constant half filter halves the camera") {
  const ImageF camera = random_image(32, 32, 3, 5);
  const ImageF out =
      relight::relight({camera, ImageF(32, 32, 3, 0.5f), std::nullopt}, rgb_guidance(camera), CascadeSchedule::parse("4:5,1:5"));
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == doctest::Approx(0.5f * camera.data()[i]));
}

TEST_CASE("RelightInputs validation") {
  const ImageF camera = random_image(8, 8, 3, 6);
  CHECK_NOTHROW(RelightInputs{camera, camera, std::nullopt}.validate());
  CHECK_THROWS_AS((RelightInputs{camera, ImageF(8, 8, 1), std::nullopt}.validate()), InvalidArgument);
  CHECK_THROWS_AS((RelightInputs{camera, ImageF(8, 7, 3), std::nullopt}.validate()), DimensionMismatch);
  CHECK_THROWS_AS((RelightInputs{camera, camera, ImageF(8, 8, 3)}.validate()), InvalidArgument);
  CHECK_THROWS_AS((RelightInputs{camera, ImageF(8, 8, 3, 1.5f), std::nullopt}.validate()), InvalidArgument);
}

TEST_CASE("shadow_pass leaves a shadow-free map unchanged") {
  const GuidanceField g = rgb_guidance(random_image(16, 16, 3, 7));
  const ImageF none(16, 16, 1, 1.0f);
  CHECK(shadow_pass(none, g, ShadowParams{}) == none);
}

TEST_CASE("shadow_pass rejects zero iterations and multi-channel maps") {
  const GuidanceField g = rgb_guidance(random_image(8, 8, 3, 8));
  CHECK_THROWS_AS(shadow_pass(ImageF(8, 8, 1, 1.0f), g, ShadowParams{0}), InvalidArgument);
  CHECK_THROWS_AS(shadow_pass(ImageF(8, 8, 3, 1.0f), g, ShadowParams{}), InvalidArgument);
}

TEST_CASE("shadow_pass preserves the shape of a hard disc shadow") {
  const RenderOutput frame = render(flat_wall_scene(128));
  const ImageF soft = shadow_pass(frame.shadow, rgb_guidance(frame.camera), ShadowParams{3});
  CHECK(region_iou(soft, frame.shadow) >= 0.9);
  for (float v : soft.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("shadow flux across a zero-coefficient silhouette is zero") {
  ImageF shadow(12, 12, 1, 1.0f);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 6; ++c) shadow.at(r, c) = 0.0f;
  }
  CoefficientField coeffs = CoefficientField::uniform(12, 12, 1.0f);
  for (int r = 0; r < 12; ++r) coeffs.horizontal(r, 5) = 0.0f;
  CHECK(shadow_pass(shadow, coeffs, ShadowParams{10}) == shadow);
}

TEST_CASE("relight of a corrupted synthetic scene beats the raw composite") {
  const SceneSpec scene = benchmark_suite(BenchmarkKind::MeshErrorCorrection, 1, 3, 128).front();
  const RenderOutput frame = render(scene);
  const ImageF corrupted = corrupt(frame.filter, frame.depth, ErrorModel::defaults());
  const ImageF truth = composite(frame.filter, frame.camera);
  const ImageF refined = relight::relight({frame.camera, corrupted, std::nullopt}, rgb_guidance(frame.camera),
                                 CascadeSchedule::parse("2:10,1:30"));
  CHECK(psnr(refined, truth) > psnr(composite(corrupted, frame.camera), truth));
}
