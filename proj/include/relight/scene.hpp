#pragma once

#include "relight/guidance.hpp"
#include "relight/image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace relight {

using Vec3 = Eigen::Vector3d;

struct CameraSpec {
  Vec3 position{0.0, 1.6, 2.7};
  Vec3 look_at{0.0, 0.9, -1.0};
  double vertical_fov = 60.0;  ///< degrees, in (10, 170)
  int width = 256;
  int height = 256;
};

struct Sphere {
  Vec3 center;
  double radius = 1.0;
};

struct AxisBox {
  Vec3 min;
  Vec3 max;
};

struct InfinitePlane {
  Vec3 point;
  Vec3 normal;
};

struct Primitive {
  std::variant<Sphere, AxisBox, InfinitePlane> shape;
  Vec3 albedo{0.8, 0.8, 0.8};
};

/// Inverse-square falloff from a point.
struct PointLight {
  Vec3 position;
  Vec3 intensity{1.0, 1.0, 1.0};
};

/// direction is the direction light travels (from the source toward the scene).
struct DirectionalLight {
  Vec3 direction{0.0, -1.0, 0.0};
  Vec3 intensity{1.0, 1.0, 1.0};
};

using Light = std::variant<PointLight, DirectionalLight>;

struct SceneSpec {
  CameraSpec camera;
  std::vector<Primitive> primitives;
  std::vector<Light> lights;
  Vec3 ambient{0.1, 0.1, 0.1};
};

/// Throws SchemaError naming the offending field, e.g. "primitives[2].radius".
void validate_scene(const SceneSpec& scene);

struct RenderOptions {
  /// When false, the first light's visibility is left out of the filter so
  /// that its shadow can be applied as a separate attenuation pass.
  bool first_light_shadow_in_filter = true;
};

struct RenderOutput {
  ImageF camera;  ///< albedo * (ambient + sum of lights), 3 channels
  ImageF filter;  ///< the same shading with albedo forced to 1
  ImageF shadow;  ///< visibility of the first light, 1 channel (all ones if no lights)
  ImageF depth;   ///< ray hit distance, 1 channel
  ImageF albedo;  ///< surface albedo, 3 channels
};

/// One primary ray per pixel centre, Lambertian shading with hard shadows from
/// occlusion rays. Lighting sums are clamped to 1 per channel. Scenes without
/// lights are accepted here (ambient only); validate_scene requires one.
RenderOutput render(const SceneSpec& scene, const RenderOptions& options = {});

/// Image-space model of a low-fidelity mesh: silhouettes are displaced and
/// dilated and the boundary band is perturbed with seeded noise.
struct ErrorModel {
  int silhouette_shift = 0;      ///< pixels; filter values are fetched from this far right
  int dilation = 0;              ///< pixels; darker values spread this far (min filter)
  double noise_amplitude = 0.0;  ///< uniform noise in [-a, a] within the band
  std::uint64_t noise_seed = 0;

  void validate() const;
  /// The corruption used by the benchmarks and the service.
  static ErrorModel defaults();
};

/// Pixels next to a depth jump larger than 10% of the nearer depth.
ImageF depth_discontinuities(const ImageF& depth);

/// Pixels within Chebyshev distance `radius` of a discontinuity.
ImageF boundary_band(const ImageF& depth, int radius);

/// Applies the error model to the filter inside the band of radius
/// shift + dilation; pixels outside the band are returned bit-identical.
ImageF corrupt(const ImageF& filter, const ImageF& depth, const ErrorModel& model);

enum class BenchmarkKind { MeshErrorCorrection, MultiLighting, Fidelity };

BenchmarkKind parse_benchmark_kind(std::string_view name);
std::string_view to_string(BenchmarkKind kind);

/// Seeded room scenes with 2-5 random primitives. Mesh-error-correction puts
/// one bright white point light in the room centre; multi-lighting two dimmed
/// lights of different hue; fidelity one warm light at a random position.
std::vector<SceneSpec> benchmark_suite(BenchmarkKind kind, int count, std::uint64_t seed, int resolution = 256);

/// A wall facing the camera with a sphere casting a hard shadow onto it.
SceneSpec flat_wall_scene(int resolution = 256);

/// Stand-in for a learned feature extractor on synthetic scenes: albedo plus
/// scaled log-depth, which ignores shading and shadow edges.
GuidanceField synthetic_features(const RenderOutput& render, float kappa = kDefaultKappa);

}  // namespace relight
