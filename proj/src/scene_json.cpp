#include "relight/scene_json.hpp"

#include "relight/errors.hpp"

#include <fstream>

namespace relight {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw SchemaError(path.empty() ? "$" : path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(field, "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

std::string join(const std::string& path, const char* key) { return path + "." + key; }

}  // namespace

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(path, "expected an array of 3 numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

json light_to_json(const Light& light) {
  if (const auto* p = std::get_if<PointLight>(&light)) {
    return {{"type", "point"}, {"position", vec3_to_json(p->position)}, {"intensity", vec3_to_json(p->intensity)}};
  }
  const auto& d = std::get<DirectionalLight>(light);
  return {{"type", "directional"}, {"direction", vec3_to_json(d.direction)}, {"intensity", vec3_to_json(d.intensity)}};
}

Light light_from_json(const json& j, const std::string& path) {
  const json& type = require(j, "type", path);
  const Vec3 intensity = vec3_from_json(require(j, "intensity", path), join(path, "intensity"));
  if (type == "point") return PointLight{vec3_from_json(require(j, "position", path), join(path, "position")), intensity};
  if (type == "directional") {
    return DirectionalLight{vec3_from_json(require(j, "direction", path), join(path, "direction")), intensity};
  }
  throw SchemaError(join(path, "type"), "expected \"point\" or \"directional\"");
}

json scene_to_json(const SceneSpec& scene) {
  json primitives = json::array();
  for (const auto& prim : scene.primitives) {
    json p;
    if (const auto* s = std::get_if<Sphere>(&prim.shape)) {
      p = {{"type", "sphere"}, {"center", vec3_to_json(s->center)}, {"radius", s->radius}};
    } else if (const auto* b = std::get_if<AxisBox>(&prim.shape)) {
      p = {{"type", "box"}, {"min", vec3_to_json(b->min)}, {"max", vec3_to_json(b->max)}};
    } else {
      const auto& pl = std::get<InfinitePlane>(prim.shape);
      p = {{"type", "plane"}, {"point", vec3_to_json(pl.point)}, {"normal", vec3_to_json(pl.normal)}};
    }
    p["albedo"] = vec3_to_json(prim.albedo);
    primitives.push_back(std::move(p));
  }
  json lights = json::array();
  for (const auto& light : scene.lights) lights.push_back(light_to_json(light));
  const auto& cam = scene.camera;
  return {{"camera",
           {{"position", vec3_to_json(cam.position)},
            {"look-at", vec3_to_json(cam.look_at)},
            {"vertical-fov", cam.vertical_fov},
            {"resolution", {{"width", cam.width}, {"height", cam.height}}}}},
          {"primitives", std::move(primitives)},
          {"lights", std::move(lights)},
          {"ambient", vec3_to_json(scene.ambient)}};
}

SceneSpec scene_from_json(const json& j) {
  SceneSpec scene;
  const json& cam = require(j, "camera", "");
  scene.camera.position = vec3_from_json(require(cam, "position", "camera"), "camera.position");
  scene.camera.look_at = vec3_from_json(require(cam, "look-at", "camera"), "camera.look-at");
  scene.camera.vertical_fov = number(require(cam, "vertical-fov", "camera"), "camera.vertical-fov");
  const json& res = require(cam, "resolution", "camera");
  scene.camera.width = integer(require(res, "width", "camera.resolution"), "camera.resolution.width");
  scene.camera.height = integer(require(res, "height", "camera.resolution"), "camera.resolution.height");

  const json& prims = require(j, "primitives", "");
  if (!prims.is_array()) throw SchemaError("primitives", "expected an array");
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const std::string path = "primitives[" + std::to_string(i) + "]";
    const json& p = prims[i];
    const json& type = require(p, "type", path);
    Primitive prim;
    if (type == "sphere") {
      prim.shape = Sphere{vec3_from_json(require(p, "center", path), join(path, "center")),
                          number(require(p, "radius", path), join(path, "radius"))};
    } else if (type == "box") {
      prim.shape = AxisBox{vec3_from_json(require(p, "min", path), join(path, "min")),
                           vec3_from_json(require(p, "max", path), join(path, "max"))};
    } else if (type == "plane") {
      prim.shape = InfinitePlane{vec3_from_json(require(p, "point", path), join(path, "point")),
                                 vec3_from_json(require(p, "normal", path), join(path, "normal"))};
    } else {
      throw SchemaError(join(path, "type"), "expected \"sphere\", \"box\" or \"plane\"");
    }
    prim.albedo = vec3_from_json(require(p, "albedo", path), join(path, "albedo"));
    scene.primitives.push_back(std::move(prim));
  }

  const json& lights = require(j, "lights", "");
  if (!lights.is_array()) throw SchemaError("lights", "expected an array");
  for (std::size_t i = 0; i < lights.size(); ++i) {
    scene.lights.push_back(light_from_json(lights[i], "lights[" + std::to_string(i) + "]"));
  }
  scene.ambient = vec3_from_json(require(j, "ambient", ""), "ambient");
  validate_scene(scene);
  return scene;
}

void save_scene(const std::filesystem::path& path, const SceneSpec& scene) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << scene_to_json(scene).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return scene_from_json(doc);
}

namespace {

bool same_shape(const Primitive& a, const Primitive& b) {
  if (a.shape.index() != b.shape.index() || a.albedo != b.albedo) return false;
  if (const auto* s = std::get_if<Sphere>(&a.shape)) {
    const auto& t = std::get<Sphere>(b.shape);
    return s->center == t.center && s->radius == t.radius;
  }
  if (const auto* x = std::get_if<AxisBox>(&a.shape)) {
    const auto& y = std::get<AxisBox>(b.shape);
    return x->min == y.min && x->max == y.max;
  }
  const auto& p = std::get<InfinitePlane>(a.shape);
  const auto& q = std::get<InfinitePlane>(b.shape);
  return p.point == q.point && p.normal == q.normal;
}

bool same_light(const Light& a, const Light& b) {
  if (a.index() != b.index()) return false;
  if (const auto* p = std::get_if<PointLight>(&a)) {
    const auto& q = std::get<PointLight>(b);
    return p->position == q.position && p->intensity == q.intensity;
  }
  const auto& d = std::get<DirectionalLight>(a);
  const auto& e = std::get<DirectionalLight>(b);
  return d.direction == e.direction && d.intensity == e.intensity;
}

}  // namespace

bool operator==(const SceneSpec& a, const SceneSpec& b) {
  const auto& ca = a.camera;
  const auto& cb = b.camera;
  if (ca.position != cb.position || ca.look_at != cb.look_at || ca.vertical_fov != cb.vertical_fov ||
      ca.width != cb.width || ca.height != cb.height || a.ambient != b.ambient) {
    return false;
  }
  return std::equal(a.primitives.begin(), a.primitives.end(), b.primitives.begin(), b.primitives.end(), same_shape) &&
         std::equal(a.lights.begin(), a.lights.end(), b.lights.begin(), b.lights.end(), same_light);
}

}  // namespace relight
