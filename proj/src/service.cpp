#include "relight/service.hpp"

#include "relight/errors.hpp"
#include "relight/png_io.hpp"
#include "relight/scene_json.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <numbers>

namespace relight::service {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

ErrorModel error_model_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("error-model", "expected an object");
  ErrorModel model = ErrorModel::defaults();
  auto read_int = [&](const char* key, auto& field) {
    if (const auto it = j.find(key); it != j.end()) {
      if (!it->is_number_integer() || it->get<long long>() < 0) {
        throw SchemaError(std::string("error-model.") + key, "expected a non-negative integer");
      }
      field = static_cast<std::remove_reference_t<decltype(field)>>(it->get<long long>());
    }
  };
  read_int("silhouette-shift", model.silhouette_shift);
  read_int("dilation", model.dilation);
  read_int("noise-seed", model.noise_seed);
  if (const auto it = j.find("boundary-noise-amplitude"); it != j.end()) {
    if (!it->is_number() || it->get<double>() < 0.0 || it->get<double>() > 1.0) {
      throw SchemaError("error-model.boundary-noise-amplitude", "expected a number in [0,1]");
    }
    model.noise_amplitude = it->get<double>();
  }
  if (model.silhouette_shift > 64 || model.dilation > 64) {
    throw SchemaError("error-model", "shift and dilation are limited to 64 pixels");
  }
  return model;
}

}  // namespace

RelightRequest parse_relight_request(const json& body) {
  if (!body.is_object()) throw SchemaError("$", "expected a JSON object");
  RelightRequest request;
  if (const auto it = body.find("lights"); it != body.end()) {
    if (!it->is_array()) throw SchemaError("lights", "expected an array");
    if (it->size() > kMaxLights) {
      throw TooManyLights("request has " + std::to_string(it->size()) + " lights; at most " +
                          std::to_string(kMaxLights) + " are allowed");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "lights[" + std::to_string(i) + "]";
      Light light = light_from_json((*it)[i], path);
      const Vec3& intensity = std::visit([](const auto& l) -> const Vec3& { return l.intensity; }, light);
      if (!intensity.allFinite() || (intensity.array() < 0.0).any()) {
        throw SchemaError(path + ".intensity", "must be non-negative");
      }
      if (const auto* d = std::get_if<DirectionalLight>(&light); d && d->direction.norm() < 1e-12) {
        throw SchemaError(path + ".direction", "must be non-zero");
      }
      request.lights.push_back(std::move(light));
    }
  }
  if (const auto it = body.find("time-of-day"); it != body.end() && !it->is_null()) {
    if (!it->is_number() || !(it->get<double>() >= 0.0 && it->get<double>() < 24.0)) {
      throw SchemaError("time-of-day", "expected hours in [0, 24)");
    }
    request.time_of_day = it->get<double>();
  }
  if (const auto it = body.find("schedule"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("schedule", "expected a schedule string");
    try {
      (void)CascadeSchedule::parse(it->get<std::string>());
    } catch (const InvalidArgument& e) {
      throw SchemaError("schedule", e.what());
    }
    request.schedule = it->get<std::string>();
  }
  if (const auto it = body.find("guidance-mode"); it != body.end()) {
    if (*it == "rgb") {
      request.guidance = GuidanceSource::Rgb;
    } else if (*it == "gadf") {
      request.guidance = GuidanceSource::Gadf;
    } else {
      throw SchemaError("guidance-mode", "expected \"rgb\" or \"gadf\"");
    }
  }
  if (const auto it = body.find("error-model"); it != body.end() && !it->is_null()) {
    request.error_model = error_model_from_json(*it);
  }
  return request;
}

json relight_request_to_json(const RelightRequest& request) {
  json lights = json::array();
  for (const auto& light : request.lights) lights.push_back(light_to_json(light));
  json body = {{"lights", std::move(lights)},
               {"guidance-mode", request.guidance == GuidanceSource::Rgb ? "rgb" : "gadf"}};
  if (request.time_of_day) body["time-of-day"] = *request.time_of_day;
  if (request.schedule) body["schedule"] = *request.schedule;
  if (request.error_model) {
    const auto& m = *request.error_model;
    body["error-model"] = {{"silhouette-shift", m.silhouette_shift},
                           {"dilation", m.dilation},
                           {"boundary-noise-amplitude", m.noise_amplitude},
                           {"noise-seed", m.noise_seed}};
  }
  return body;
}

DirectionalLight time_of_day_light(double hours) {
  const double phase = (hours - 6.0) / 14.0;  // 0 at 06:00, 0.5 at 13:00, 1 at 20:00
  if (phase > 0.0 && phase < 1.0) {
    const double elevation = 0.5 * std::numbers::pi * std::sin(std::numbers::pi * phase);
    const double azimuth = std::numbers::pi * phase;
    const Vec3 to_sun{std::cos(elevation) * std::cos(azimuth), std::sin(elevation),
                      std::cos(elevation) * std::sin(azimuth)};
    return {-to_sun, std::max(0.0, std::sin(elevation)) * Vec3{1.0, 0.95, 0.85}};
  }
  return {Vec3{0.3, -1.0, -0.4}.normalized(), Vec3{0.05, 0.06, 0.12}};
}

RelightService::RelightService(ServiceConfig config) : config_(std::move(config)) {
  validate_scene(config_.scene);
  scene_ = config_.scene;
}

SceneSpec RelightService::scene() const {
  std::shared_lock lock(mutex_);
  return scene_;
}

void RelightService::set_scene(SceneSpec scene) {
  validate_scene(scene);
  std::unique_lock lock(mutex_);
  scene_ = std::move(scene);
  cached_.reset();
}

std::shared_ptr<const RelightService::Session> RelightService::build_session(const SceneSpec& scene) const {
  auto session = std::make_shared<Session>();
  session->scene = scene;
  session->camera = quantize(render(scene).camera, kIntermediateBitDepth);
  session->rgb_coeffs =
      std::make_shared<const CoefficientField>(build_coefficients(rgb_guidance(session->camera, config_.kappa)));
  return session;
}

std::shared_ptr<const RelightService::Session> RelightService::snapshot() const {
  SceneSpec scene;
  {
    std::shared_lock lock(mutex_);
    if (config_.caching && cached_) return cached_;
    scene = scene_;
  }
  auto session = build_session(scene);
  if (config_.caching) {
    std::unique_lock lock(mutex_);
    // Install only if no scene update raced with the build.
    if (!cached_ && scene_ == scene) cached_ = session;
  }
  return session;
}

CoefficientField RelightService::coefficients_for(const Session& session, GuidanceSource source) const {
  if (source == GuidanceSource::Rgb) return *session.rgb_coeffs;
  if (!config_.features) throw SchemaError("guidance-mode", "server has no feature map loaded");
  const auto& f = *config_.features;
  if (f.width() != session.camera.width() || f.height() != session.camera.height()) {
    throw SchemaError("guidance-mode", "feature map size does not match the scene camera");
  }
  return build_coefficients(f);
}

FrameInputs RelightService::prepare(const RelightRequest& request) const {
  return prepare_from(*snapshot(), request);
}

FrameInputs RelightService::prepare_from(const Session& session, const RelightRequest& request) const {
  if (request.lights.size() > kMaxLights) throw TooManyLights("too many lights");
  SceneSpec lit = session.scene;
  lit.lights = request.lights;
  if (request.time_of_day) lit.lights.push_back(time_of_day_light(*request.time_of_day));
  const RenderOutput frame = render(lit, RenderOptions{.first_light_shadow_in_filter = false});
  const ErrorModel errors = request.error_model.value_or(ErrorModel::defaults());
  std::optional<ImageF> shadow;
  if (!lit.lights.empty()) shadow = quantize(frame.shadow, kIntermediateBitDepth);
  return {session.camera, quantize(corrupt(frame.filter, frame.depth, errors), kIntermediateBitDepth),
          std::move(shadow),
          CascadeSchedule::parse(request.schedule.value_or(std::string(kDefaultSchedule)), config_.lambda,
                                 config_.kappa)};
}

FrameResult RelightService::relight(const RelightRequest& request, bool raw) const {
  const auto start = Clock::now();
  const auto session = snapshot();
  const FrameInputs inputs = prepare_from(*session, request);
  FrameResult result;
  ImageF frame;
  const auto refine_start = Clock::now();
  if (raw) {
    frame = composite(inputs.filter, inputs.camera, inputs.shadow);
  } else {
    const CoefficientField coeffs = coefficients_for(*session, request.guidance);
    ShadowParams shadow = config_.shadow;
    shadow.lambda = config_.lambda;
    frame = relight::relight({inputs.camera, inputs.filter, inputs.shadow}, coeffs, inputs.schedule, shadow);
  }
  result.refine_ms = ms_since(refine_start);
  result.png = encode_png(frame, kOutputBitDepth);
  result.total_ms = ms_since(start);
  return result;
}

namespace {

void send_error(httplib::Response& res, int status, const std::string& message, const std::string& path = {}) {
  json body = {{"error", message}};
  if (!path.empty()) body["path"] = path;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::string format_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

}  // namespace

HttpServer::HttpServer(RelightService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  // SO_REUSEADDR only, so that a port held by another process fails to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Expose-Headers", "X-Refine-Ms, X-Total-Ms"}});

  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/scene", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(scene_to_json(service_.scene()).dump(), "application/json");
  });

  srv.Put("/scene", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      service_.set_scene(scene_from_json(json::parse(req.body)));
      res.status = 204;
    } catch (const json::parse_error& e) {
      send_error(res, 400, std::string("invalid JSON: ") + e.what(), "$");
    } catch (const SchemaError& e) {
      send_error(res, 400, e.what(), e.path());
    }
  });

  srv.Post("/relight", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const RelightRequest request = parse_relight_request(req.body.empty() ? json::object() : json::parse(req.body));
      const bool raw = req.has_param("raw") && req.get_param_value("raw") == "true";
      const FrameResult frame = service_.relight(request, raw);
      res.set_header("X-Refine-Ms", format_ms(frame.refine_ms));
      res.set_header("X-Total-Ms", format_ms(frame.total_ms));
      res.set_content(std::string(frame.png.begin(), frame.png.end()), "image/png");
    } catch (const json::parse_error& e) {
      send_error(res, 400, std::string("invalid JSON: ") + e.what(), "$");
    } catch (const SchemaError& e) {
      send_error(res, 400, e.what(), e.path());
    } catch (const TooManyLights& e) {
      send_error(res, 422, e.what(), "lights");
    } catch (const InvalidArgument& e) {
      send_error(res, 400, e.what());
    }
  });
}

HttpServer::~HttpServer() = default;

bool HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

}  // namespace relight::service
