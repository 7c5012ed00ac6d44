#include "relight/cli.hpp"
#include "relight/compose.hpp"
#include "relight/errors.hpp"
#include "relight/png_io.hpp"
#include "relight/scene_json.hpp"
#include "relight/service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

using namespace relight;
using namespace relight::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SceneSpec small_scene() {
  SceneSpec scene = flat_wall_scene(48);
  return scene;
}

class RunningServer {
 public:
  explicit RunningServer(ServiceConfig config) : service_(std::move(config)), server_(service_) {
    REQUIRE(server_.bind("127.0.0.1", 0));
    thread_ = std::thread([this] { server_.listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", server_.port());
    client_->set_read_timeout(60, 0);
    for (int i = 0; i < 100 && !client_->Get("/scene"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ~RunningServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client& client() { return *client_; }
  RelightService& service() { return service_; }

 private:
  RelightService service_;
  HttpServer server_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

ServiceConfig config_for(SceneSpec scene) {
  ServiceConfig config;
  config.scene = std::move(scene);
  return config;
}

const char* kZeroErrors = R"("error-model": {"silhouette-shift": 0, "dilation": 0, "boundary-noise-amplitude": 0})";

}  // namespace

TEST_CASE("parse_relight_request reads every field") {
  const json body = json::parse(R"({
    "lights": [{"type": "point", "position": [0, 2, 0], "intensity": [1, 0.5, 0.2]}],
    "time-of-day": 9.5, "schedule": "4:5,2:5", "guidance-mode": "gadf",
    "error-model": {"silhouette-shift": 3, "noise-seed": 9}})");
  const RelightRequest r = parse_relight_request(body);
  CHECK(r.lights.size() == 1);
  CHECK(*r.time_of_day == 9.5);
  CHECK(*r.schedule == "4:5,2:5");
  CHECK(r.guidance == GuidanceSource::Gadf);
  CHECK(r.error_model->silhouette_shift == 3);
  CHECK(r.error_model->dilation == ErrorModel::defaults().dilation);
  CHECK(r.error_model->noise_seed == 9u);
  CHECK(parse_relight_request(relight_request_to_json(r)).lights.size() == 1);
}

TEST_CASE("parse_relight_request reports field paths") {
  auto path_of = [](const char* text) {
    try {
      parse_relight_request(json::parse(text));
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  CHECK(path_of(R"({"lights": [{"type": "point", "position": [0, 1], "intensity": [1, 1, 1]}]})") == "lights[0].position");
  CHECK(path_of(R"({"time-of-day": 25})") == "time-of-day");
  CHECK(path_of(R"({"schedule": "3:1"})") == "schedule");
  CHECK(path_of(R"({"guidance-mode": "depth"})") == "guidance-mode");
  CHECK(path_of(R"({"error-model": {"dilation": -1}})") == "error-model.dilation");
  json many = {{"lights", json::array()}};
  for (int i = 0; i < 17; ++i) many["lights"].push_back({{"type", "directional"}, {"direction", {0, -1, 0}}, {"intensity", {1, 1, 1}}});
  CHECK_THROWS_AS(parse_relight_request(many), TooManyLights);
}

TEST_CASE("time_of_day_light follows the sun and falls back to moonlight") {
  const DirectionalLight noon = time_of_day_light(13.0);
  CHECK(noon.direction.y() == doctest::Approx(-1.0));
  CHECK(noon.intensity.x() == doctest::Approx(1.0));
  const DirectionalLight morning = time_of_day_light(8.0);
  CHECK(morning.intensity.x() < noon.intensity.x());
  CHECK(morning.direction.y() < 0.0);
  const DirectionalLight night = time_of_day_light(23.0);
  CHECK(night.intensity.z() > night.intensity.x());
  CHECK(night.intensity.norm() < 0.2);
}

TEST_CASE("GET and PUT /scene") {
  RunningServer server(config_for(small_scene()));
  auto got = server.client().Get("/scene");
  REQUIRE(got);
  CHECK(got->status == 200);
  CHECK(got->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(scene_from_json(json::parse(got->body)) == small_scene());

  json bad = scene_to_json(small_scene());
  bad["camera"]["vertical-fov"] = 200;
  auto rejected = server.client().Put("/scene", bad.dump(), "application/json");
  REQUIRE(rejected);
  CHECK(rejected->status == 400);
  CHECK(json::parse(rejected->body)["path"] == "camera.vertical-fov");

  SceneSpec moved = small_scene();
  moved.ambient = {0.5, 0.5, 0.5};
  auto accepted = server.client().Put("/scene", scene_to_json(moved).dump(), "application/json");
  REQUIRE(accepted);
  CHECK(accepted->status == 204);
  CHECK(scene_from_json(json::parse(server.client().Get("/scene")->body)) == moved);
}

TEST_CASE("POST /relight returns PNGs with timing headers and deterministic bodies") {
  RunningServer server(config_for(small_scene()));
  const std::string body = R"({"lights": [{"type": "point", "position": [1, 2, 1], "intensity": [3, 3, 3]}]})";
  auto a = server.client().Post("/relight", body, "application/json");
  auto b = server.client().Post("/relight", body, "application/json");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->status == 200);
  CHECK(a->get_header_value("Content-Type") == "image/png");
  CHECK(std::stod(a->get_header_value("X-Refine-Ms")) >= 0.0);
  CHECK(std::stod(a->get_header_value("X-Total-Ms")) >= std::stod(a->get_header_value("X-Refine-Ms")));
  CHECK(a->body == b->body);
  const PngImage img = decode_png(std::span(reinterpret_cast<const std::uint8_t*>(a->body.data()), a->body.size()));
  CHECK(img.image.width() == 48);
  CHECK(img.bit_depth == 8);

  auto raw = server.client().Post("/relight?raw=true", body, "application/json");
  REQUIRE(raw);
  CHECK(raw->status == 200);
  CHECK(raw->body != a->body);
}

TEST_CASE("POST /relight error statuses") {
  RunningServer server(config_for(small_scene()));
  auto bad_json = server.client().Post("/relight", "{not json", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);
  json many = {{"lights", json::array()}};
  for (int i = 0; i < 17; ++i) many["lights"].push_back({{"type", "directional"}, {"direction", {0, -1, 0}}, {"intensity", {1, 1, 1}}});
  auto too_many = server.client().Post("/relight", many.dump(), "application/json");
  REQUIRE(too_many);
  CHECK(too_many->status == 422);
  auto no_features = server.client().Post("/relight", R"({"guidance-mode": "gadf"})", "application/json");
  REQUIRE(no_features);
  CHECK(no_features->status == 400);
}

TEST_CASE("a request with no lights returns the ambient-lit composite") {
  SceneSpec scene = small_scene();
  scene.ambient = {0.6, 0.6, 0.6};
  RunningServer server(config_for(scene));
  auto res = server.client().Post("/relight", std::string("{") + kZeroErrors + "}", "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const ImageF camera = quantize(render(scene).camera, kIntermediateBitDepth);
  const ImageF filter(48, 48, 3, quantize(0.6f, kIntermediateBitDepth));
  const auto expected = encode_png(composite(filter, camera), kOutputBitDepth);
  CHECK(res->body == std::string(expected.begin(), expected.end()));
}

TEST_CASE("the CLI reproduces a service frame from its intermediates") {
  const fs::path dir = fs::temp_directory_path() / ("relight-parity-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  RelightService svc(config_for(small_scene()));
  const RelightRequest request = parse_relight_request(json::parse(
      R"({"lights": [{"type": "point", "position": [1.2, 2, 0.5], "intensity": [3, 2.5, 2]}], "time-of-day": 10})"));
  const FrameInputs in = svc.prepare(request);
  write_png(dir / "camera.png", in.camera, kIntermediateBitDepth);
  write_png(dir / "filter.png", in.filter, kIntermediateBitDepth);
  REQUIRE(in.shadow);
  write_png(dir / "shadow.png", *in.shadow, kIntermediateBitDepth);
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run({"relight", "--rgb", (dir / "camera.png").string(), "--filter", (dir / "filter.png").string(),
                             "--shadow", (dir / "shadow.png").string(), "--schedule", in.schedule.to_string(),
                             "--bit-depth", "8", "--out", (dir / "out.png").string()},
                            out, err);
  REQUIRE(code == cli::kOk);
  std::ifstream file(dir / "out.png", std::ios::binary);
  const std::vector<std::uint8_t> cli_png{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
  CHECK(cli_png == svc.relight(request).png);
  fs::remove_all(dir);
}

TEST_CASE("concurrent relights and scene updates do not interfere") {
  RelightService svc(config_for(small_scene()));
  const RelightRequest request = parse_relight_request(json::parse(R"({"lights": [{"type": "point", "position": [0, 2, 0], "intensity": [2, 2, 2]}]})"));
  const auto reference = svc.relight(request).png;
  std::vector<std::thread> workers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 3; ++t) {
    workers.emplace_back([&] {
      for (int i = 0; i < 3; ++i) {
        if (svc.relight(request).png != reference) ++mismatches;
      }
    });
  }
  workers.emplace_back([&] {
    for (int i = 0; i < 3; ++i) svc.set_scene(small_scene());
  });
  for (auto& w : workers) w.join();
  CHECK(mismatches == 0);
}
