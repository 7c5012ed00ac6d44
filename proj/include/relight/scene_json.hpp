#pragma once

#include "relight/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace relight {

// Scene documents use lower-kebab-case keys:
//
//   {
//     "camera": {"position": [x,y,z], "look-at": [x,y,z], "vertical-fov": 60,
//                "resolution": {"width": 256, "height": 256}},
//     "primitives": [{"type": "sphere", "center": [..], "radius": r, "albedo": [r,g,b]},
//                    {"type": "box", "min": [..], "max": [..], "albedo": [..]},
//                    {"type": "plane", "point": [..], "normal": [..], "albedo": [..]}],
//     "lights": [{"type": "point", "position": [..], "intensity": [r,g,b]},
//                {"type": "directional", "direction": [..], "intensity": [..]}],
//     "ambient": [r,g,b]
//   }
//
// Doubles are written with round-trip precision, so save/load is lossless.

nlohmann::json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json light_to_json(const Light& light);
Light light_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json scene_to_json(const SceneSpec& scene);

/// Parses and validates; throws SchemaError with the offending field path.
SceneSpec scene_from_json(const nlohmann::json& j);

void save_scene(const std::filesystem::path& path, const SceneSpec& scene);
SceneSpec load_scene(const std::filesystem::path& path);

bool operator==(const SceneSpec& a, const SceneSpec& b);

}  // namespace relight
