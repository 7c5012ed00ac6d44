#include "relight/scene.hpp"

#include "relight/errors.hpp"
#include "relight/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace relight {

namespace {

constexpr double kHitEpsilon = 1e-6;
constexpr double kShadowBias = 1e-5;
constexpr float kMissDepth = 1000.0f;

bool finite(const Vec3& v) { return v.allFinite(); }

std::string idx(const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

}  // namespace

void validate_scene(const SceneSpec& scene) {
  const auto& cam = scene.camera;
  if (!finite(cam.position)) throw SchemaError("camera.position", "must be finite");
  if (!finite(cam.look_at)) throw SchemaError("camera.look-at", "must be finite");
  if (!(cam.vertical_fov > 10.0 && cam.vertical_fov < 170.0)) {
    throw SchemaError("camera.vertical-fov", "must lie in (10, 170) degrees");
  }
  if (cam.width < 1 || cam.height < 1 || cam.width > 8192 || cam.height > 8192) {
    throw SchemaError("camera.resolution", "must be between 1 and 8192 pixels");
  }
  if (scene.primitives.empty()) throw SchemaError("primitives", "need at least one primitive");
  if (scene.lights.empty()) throw SchemaError("lights", "need at least one light");
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto& prim = scene.primitives[i];
    const std::string base = idx("primitives", i);
    if (!finite(prim.albedo) || (prim.albedo.array() < 0.0).any() || (prim.albedo.array() > 1.0).any()) {
      throw SchemaError(base + ".albedo", "must lie in [0,1]");
    }
    if (const auto* s = std::get_if<Sphere>(&prim.shape)) {
      if (!finite(s->center)) throw SchemaError(base + ".center", "must be finite");
      if (!(s->radius > 0.0) || !std::isfinite(s->radius)) throw SchemaError(base + ".radius", "must be positive");
    } else if (const auto* b = std::get_if<AxisBox>(&prim.shape)) {
      if (!finite(b->min) || !finite(b->max) || !(b->min.array() < b->max.array()).all()) {
        throw SchemaError(base + ".max", "box max must exceed min on every axis");
      }
    } else if (const auto* p = std::get_if<InfinitePlane>(&prim.shape)) {
      if (!finite(p->point)) throw SchemaError(base + ".point", "must be finite");
      if (!finite(p->normal) || p->normal.norm() < 1e-12) throw SchemaError(base + ".normal", "must be non-zero");
    }
  }
  for (std::size_t i = 0; i < scene.lights.size(); ++i) {
    const std::string base = idx("lights", i);
    const Vec3& intensity =
        std::visit([](const auto& light) -> const Vec3& { return light.intensity; }, scene.lights[i]);
    if (!finite(intensity) || (intensity.array() < 0.0).any()) {
      throw SchemaError(base + ".intensity", "must be non-negative");
    }
    if (const auto* d = std::get_if<DirectionalLight>(&scene.lights[i])) {
      if (!finite(d->direction) || d->direction.norm() < 1e-12) {
        throw SchemaError(base + ".direction", "must be non-zero");
      }
    } else if (!finite(std::get<PointLight>(scene.lights[i]).position)) {
      throw SchemaError(base + ".position", "must be finite");
    }
  }
  if (!finite(scene.ambient) || (scene.ambient.array() < 0.0).any()) {
    throw SchemaError("ambient", "must be non-negative");
  }
}

namespace {

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal = Vec3::Zero();
  std::size_t primitive = 0;
};

std::optional<std::pair<double, Vec3>> intersect(const Sphere& s, const Vec3& origin, const Vec3& dir) {
  const Vec3 oc = origin - s.center;
  const double b = oc.dot(dir);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  double t = -b - root;
  if (t <= kHitEpsilon) t = -b + root;
  if (t <= kHitEpsilon) return std::nullopt;
  return std::make_pair(t, ((origin + t * dir) - s.center) / s.radius);
}

std::optional<std::pair<double, Vec3>> intersect(const AxisBox& box, const Vec3& origin, const Vec3& dir) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis_near = -1;
  int axis_far = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[a] - origin[a]) / dir[a];
    double t1 = (box.max[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis_near = a;
    }
    if (t1 < t_far) {
      t_far = t1;
      axis_far = a;
    }
  }
  if (t_near > t_far) return std::nullopt;
  double t = t_near;
  int axis = axis_near;
  if (t <= kHitEpsilon) {
    t = t_far;
    axis = axis_far;
  }
  if (t <= kHitEpsilon || axis < 0) return std::nullopt;
  Vec3 normal = Vec3::Zero();
  normal[axis] = 1.0;
  return std::make_pair(t, normal);
}

std::optional<std::pair<double, Vec3>> intersect(const InfinitePlane& plane, const Vec3& origin, const Vec3& dir) {
  const Vec3 n = plane.normal.normalized();
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (plane.point - origin).dot(n) / denom;
  if (t <= kHitEpsilon) return std::nullopt;
  return std::make_pair(t, n);
}

std::optional<std::pair<double, Vec3>> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir) {
  return std::visit([&](const auto& shape) { return intersect(shape, origin, dir); }, prim.shape);
}

Hit trace(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
  Hit best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    if (auto hit = intersect(scene.primitives[i], origin, dir); hit && hit->first < best.t) {
      best.t = hit->first;
      best.normal = hit->second;
      best.primitive = i;
    }
  }
  if (best.normal.dot(dir) > 0.0) best.normal = -best.normal;
  return best;
}

bool occluded(const SceneSpec& scene, const Vec3& origin, const Vec3& dir, double max_t) {
  for (const auto& prim : scene.primitives) {
    if (auto hit = intersect(prim, origin, dir); hit && hit->first < max_t) return true;
  }
  return false;
}

struct CameraBasis {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
  double half_height;
  double aspect;
};

CameraBasis make_basis(const CameraSpec& cam) {
  const Vec3 to_target = cam.look_at - cam.position;
  if (to_target.norm() < 1e-12) throw InvalidArgument("camera position coincides with look-at");
  CameraBasis basis;
  basis.forward = to_target.normalized();
  const Vec3 right = basis.forward.cross(Vec3::UnitY());
  if (right.norm() < 1e-9) throw InvalidArgument("camera looks straight up or down; basis is degenerate");
  basis.right = right.normalized();
  basis.up = basis.right.cross(basis.forward);
  basis.half_height = std::tan(cam.vertical_fov * std::numbers::pi / 360.0);
  basis.aspect = static_cast<double>(cam.width) / cam.height;
  return basis;
}

}  // namespace

RenderOutput render(const SceneSpec& scene, const RenderOptions& options) {
  const auto& cam = scene.camera;
  if (cam.width < 1 || cam.height < 1) throw InvalidArgument("camera resolution must be positive");
  const CameraBasis basis = make_basis(cam);
  const int w = cam.width;
  const int h = cam.height;
  RenderOutput out{ImageF(w, h, 3), ImageF(w, h, 3), ImageF(w, h, 1, 1.0f), ImageF(w, h, 1, kMissDepth),
                   ImageF(w, h, 3)};

  parallel::for_rows(h, static_cast<long long>(w) * 64, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      for (int c = 0; c < w; ++c) {
        const double sx = ((c + 0.5) / w * 2.0 - 1.0) * basis.half_height * basis.aspect;
        const double sy = (1.0 - (r + 0.5) / h * 2.0) * basis.half_height;
        const Vec3 dir = (basis.forward + sx * basis.right + sy * basis.up).normalized();
        const Hit hit = trace(scene, cam.position, dir);
        Vec3 lit = scene.ambient;
        Vec3 filter_lit = scene.ambient;
        if (!std::isfinite(hit.t)) {
          for (int k = 0; k < 3; ++k) out.filter.at(r, c, k) = static_cast<float>(std::min(lit[k], 1.0));
          continue;
        }
        const Vec3 point = cam.position + hit.t * dir;
        const Vec3 origin = point + kShadowBias * hit.normal;
        for (std::size_t i = 0; i < scene.lights.size(); ++i) {
          Vec3 to_light;
          double max_t;
          double falloff;
          Vec3 intensity;
          if (const auto* p = std::get_if<PointLight>(&scene.lights[i])) {
            const Vec3 delta = p->position - point;
            const double dist2 = delta.squaredNorm();
            max_t = std::sqrt(dist2);
            to_light = delta / max_t;
            falloff = 1.0 / dist2;
            intensity = p->intensity;
          } else {
            const auto& d = std::get<DirectionalLight>(scene.lights[i]);
            to_light = -d.direction.normalized();
            max_t = std::numeric_limits<double>::infinity();
            falloff = 1.0;
            intensity = d.intensity;
          }
          const bool visible = !occluded(scene, origin, to_light, max_t);
          if (i == 0) out.shadow.at(r, c) = visible ? 1.0f : 0.0f;
          const double cosine = std::max(0.0, hit.normal.dot(to_light));
          const Vec3 contribution = intensity * (cosine * falloff);
          if (visible) lit += contribution;
          if (visible || (i == 0 && !options.first_light_shadow_in_filter)) filter_lit += contribution;
        }
        const Vec3& albedo = scene.primitives[hit.primitive].albedo;
        for (int k = 0; k < 3; ++k) {
          const double shade = std::min(lit[k], 1.0);
          out.camera.at(r, c, k) = static_cast<float>(albedo[k] * shade);
          out.filter.at(r, c, k) = static_cast<float>(std::min(filter_lit[k], 1.0));
          out.albedo.at(r, c, k) = static_cast<float>(albedo[k]);
        }
        out.depth.at(r, c) = static_cast<float>(hit.t);
      }
    }
  });
  return out;
}

void ErrorModel::validate() const {
  if (silhouette_shift < 0 || dilation < 0 || !(noise_amplitude >= 0.0) || noise_amplitude > 1.0) {
    throw InvalidArgument("error model magnitudes must be non-negative (noise amplitude at most 1)");
  }
}

ErrorModel ErrorModel::defaults() { return ErrorModel{2, 2, 0.3, 1}; }

ImageF depth_discontinuities(const ImageF& depth) {
  if (depth.channels() != 1) throw InvalidArgument("depth must be single-channel");
  const int w = depth.width();
  const int h = depth.height();
  ImageF mask(w, h, 1);
  auto jump = [](float a, float b) { return std::abs(a - b) > 0.1f * std::min(a, b); };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float d = depth.at(r, c);
      const bool edge = (c > 0 && jump(d, depth.at(r, c - 1))) || (c + 1 < w && jump(d, depth.at(r, c + 1))) ||
                        (r > 0 && jump(d, depth.at(r - 1, c))) || (r + 1 < h && jump(d, depth.at(r + 1, c)));
      mask.at(r, c) = edge ? 1.0f : 0.0f;
    }
  }
  return mask;
}

ImageF boundary_band(const ImageF& depth, int radius) {
  ImageF mask = depth_discontinuities(depth);
  if (radius <= 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  // Separable max filter: Chebyshev dilation.
  ImageF rows(w, h, 1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      float v = 0.0f;
      for (int dc = std::max(0, c - radius); dc <= std::min(w - 1, c + radius); ++dc) v = std::max(v, mask.at(r, dc));
      rows.at(r, c) = v;
    }
  ImageF band(w, h, 1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      float v = 0.0f;
      for (int dr = std::max(0, r - radius); dr <= std::min(h - 1, r + radius); ++dr) v = std::max(v, rows.at(dr, c));
      band.at(r, c) = v;
    }
  return band;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Sequential generator for scene families.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : state_(seed) {}
  double uniform(double lo, double hi) {
    state_ = splitmix64(state_);
    return lo + (hi - lo) * unit_from_bits(state_);
  }
  int integer(int lo, int hi) { return std::min(hi, lo + static_cast<int>(uniform(0.0, hi - lo + 1))); }

 private:
  std::uint64_t state_;
};

}  // namespace

ImageF corrupt(const ImageF& filter, const ImageF& depth, const ErrorModel& model) {
  model.validate();
  if (filter.width() != depth.width() || filter.height() != depth.height()) {
    throw DimensionMismatch("filter and depth sizes differ");
  }
  const int radius = model.silhouette_shift + model.dilation;
  const ImageF band = boundary_band(depth, radius);
  const int w = filter.width();
  const int h = filter.height();
  const int ch = filter.channels();
  ImageF out = filter;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (band.at(r, c) == 0.0f) continue;
      // Noise is keyed on (seed, pixel) so it does not depend on visit order.
      const double noise =
          model.noise_amplitude > 0.0
              ? model.noise_amplitude *
                    (2.0 * unit_from_bits(splitmix64(model.noise_seed ^ splitmix64(static_cast<std::uint64_t>(r) * w + c))) - 1.0)
              : 0.0;
      for (int k = 0; k < ch; ++k) {
        float v = std::numeric_limits<float>::infinity();
        for (int dr = -model.dilation; dr <= model.dilation; ++dr) {
          const int rr = std::clamp(r + dr, 0, h - 1);
          for (int dc = -model.dilation; dc <= model.dilation; ++dc) {
            const int cc = std::clamp(c + dc + model.silhouette_shift, 0, w - 1);
            v = std::min(v, filter.at(rr, cc, k));
          }
        }
        if (noise != 0.0) v = static_cast<float>(std::clamp(v + noise, 0.0, 1.0));
        out.at(r, c, k) = v;
      }
    }
  }
  return out;
}

BenchmarkKind parse_benchmark_kind(std::string_view name) {
  if (name == "mesh-error-correction" || name == "1") return BenchmarkKind::MeshErrorCorrection;
  if (name == "multi-lighting" || name == "2") return BenchmarkKind::MultiLighting;
  if (name == "fidelity" || name == "3") return BenchmarkKind::Fidelity;
  throw InvalidArgument("unknown benchmark kind '" + std::string(name) + "'");
}

std::string_view to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::MeshErrorCorrection:
      return "mesh-error-correction";
    case BenchmarkKind::MultiLighting:
      return "multi-lighting";
    case BenchmarkKind::Fidelity:
      return "fidelity";
  }
  return "unknown";
}

namespace {

Vec3 hue_to_rgb(double hue, double saturation) {
  const double h6 = std::fmod(hue, 1.0) * 6.0;
  const double x = 1.0 - std::abs(std::fmod(h6, 2.0) - 1.0);
  Vec3 rgb;
  switch (static_cast<int>(h6)) {
    case 0: rgb = {1, x, 0}; break;
    case 1: rgb = {x, 1, 0}; break;
    case 2: rgb = {0, 1, x}; break;
    case 3: rgb = {0, x, 1}; break;
    case 4: rgb = {x, 0, 1}; break;
    default: rgb = {1, 0, x}; break;
  }
  return (1.0 - saturation) * Vec3::Ones() + saturation * rgb;
}

constexpr double kRoomHalf = 3.0;
constexpr double kRoomHeight = 3.0;

Vec3 random_albedo(SceneRng& rng) { return {rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9)}; }

}  // namespace

std::vector<SceneSpec> benchmark_suite(BenchmarkKind kind, int count, std::uint64_t seed, int resolution) {
  if (count < 1) throw InvalidArgument("benchmark count must be at least 1");
  if (resolution < 8) throw InvalidArgument("benchmark resolution must be at least 8");
  SceneRng rng(splitmix64(seed) ^ (static_cast<std::uint64_t>(kind) + 1) * 0x632be59bd9b4e019ULL);
  std::vector<SceneSpec> scenes;
  scenes.reserve(count);
  for (int i = 0; i < count; ++i) {
    SceneSpec scene;
    scene.camera.width = resolution;
    scene.camera.height = resolution;
    scene.camera.position = {rng.uniform(-0.6, 0.6), rng.uniform(1.4, 1.8), 2.7};
    scene.camera.look_at = {rng.uniform(-0.4, 0.4), 0.8, -1.0};
    scene.camera.vertical_fov = 60.0;
    scene.primitives.push_back({AxisBox{{-kRoomHalf, 0.0, -kRoomHalf}, {kRoomHalf, kRoomHeight, kRoomHalf}},
                                {rng.uniform(0.6, 0.85), rng.uniform(0.6, 0.85), rng.uniform(0.6, 0.85)}});
    const int objects = rng.integer(2, 5);
    for (int k = 0; k < objects; ++k) {
      const double x = rng.uniform(-2.0, 2.0);
      const double z = rng.uniform(-2.4, 0.8);
      if (rng.uniform(0.0, 1.0) < 0.5) {
        const double radius = rng.uniform(0.25, 0.6);
        scene.primitives.push_back({Sphere{{x, radius, z}, radius}, random_albedo(rng)});
      } else {
        const double sx = rng.uniform(0.2, 0.6);
        const double sy = rng.uniform(0.3, 1.2);
        const double sz = rng.uniform(0.2, 0.6);
        scene.primitives.push_back({AxisBox{{x - sx, 0.0, z - sz}, {x + sx, sy, z + sz}}, random_albedo(rng)});
      }
    }
    switch (kind) {
      case BenchmarkKind::MeshErrorCorrection:
        scene.lights.push_back(PointLight{{0.0, 2.6, 0.0}, {6.0, 6.0, 6.0}});
        scene.ambient = {0.15, 0.15, 0.15};
        break;
      case BenchmarkKind::MultiLighting: {
        const double hue = rng.uniform(0.0, 1.0);
        const double offset = rng.uniform(0.33, 0.67);
        for (const double h : {hue, hue + offset}) {
          const Vec3 position{rng.uniform(-2.5, 2.5), rng.uniform(2.0, 2.8), rng.uniform(-2.5, 1.5)};
          scene.lights.push_back(PointLight{position, 2.5 * hue_to_rgb(h, 0.7)});
        }
        scene.ambient = {0.08, 0.08, 0.08};
        break;
      }
      case BenchmarkKind::Fidelity: {
        const Vec3 position{rng.uniform(-2.5, 2.5), rng.uniform(2.0, 2.8), rng.uniform(-2.5, 1.5)};
        scene.lights.push_back(PointLight{position, Vec3{5.0, 4.6, 4.0}});
        scene.ambient = {0.12, 0.12, 0.12};
        break;
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

SceneSpec flat_wall_scene(int resolution) {
  SceneSpec scene;
  scene.camera.position = {0.0, 1.0, 2.5};
  scene.camera.look_at = {0.0, 1.0, -2.0};
  scene.camera.vertical_fov = 50.0;
  scene.camera.width = resolution;
  scene.camera.height = resolution;
  scene.primitives.push_back({InfinitePlane{{0.0, 0.0, -2.0}, {0.0, 0.0, 1.0}}, {0.85, 0.85, 0.8}});
  scene.primitives.push_back({Sphere{{0.0, 1.0, -0.8}, 0.35}, {0.7, 0.3, 0.25}});
  scene.lights.push_back(PointLight{{1.5, 2.0, 1.0}, {4.0, 4.0, 4.0}});
  scene.ambient = {0.25, 0.25, 0.25};
  return scene;
}

GuidanceField synthetic_features(const RenderOutput& render, float kappa) {
  const int w = render.albedo.width();
  const int h = render.albedo.height();
  ImageF features(w, h, 4);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < 3; ++k) features.at(r, c, k) = render.albedo.at(r, c, k);
      features.at(r, c, 3) = 0.5f * std::log(std::max(render.depth.at(r, c), 1e-3f));
    }
  return GuidanceField(std::move(features), kappa);
}

}  // namespace relight
