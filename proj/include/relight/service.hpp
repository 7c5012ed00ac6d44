#pragma once

#include "relight/compose.hpp"
#include "relight/diffusion.hpp"
#include "relight/guidance.hpp"
#include "relight/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace relight::service {

inline constexpr std::size_t kMaxLights = 16;

/// Intermediates are stored at this PNG depth so that a frame written out and
/// fed to the CLI reproduces the service output exactly.
inline constexpr int kIntermediateBitDepth = 16;
inline constexpr int kOutputBitDepth = 8;

enum class GuidanceSource { Rgb, Gadf };

struct RelightRequest {
  std::vector<Light> lights;
  std::optional<double> time_of_day;  ///< hours in [0, 24); adds a sun or moon light
  std::optional<std::string> schedule;
  GuidanceSource guidance = GuidanceSource::Rgb;
  std::optional<ErrorModel> error_model;  ///< defaults to ErrorModel::defaults()
};

/// More than kMaxLights lights in one request (HTTP 422).
class TooManyLights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws SchemaError (HTTP 400) or TooManyLights.
RelightRequest parse_relight_request(const nlohmann::json& body);
nlohmann::json relight_request_to_json(const RelightRequest& request);

/// Sun between 06:00 and 20:00: elevation follows a sine arc peaking at 13:00,
/// azimuth sweeps east to west, intensity scales with sin(elevation).
/// Outside that window a dim blue directional moonlight.
DirectionalLight time_of_day_light(double hours);

struct ServiceConfig {
  SceneSpec scene;
  std::optional<GuidanceField> features;  ///< used when a request asks for "gadf"
  float lambda = kDefaultLambda;
  float kappa = kDefaultKappa;
  ShadowParams shadow;
  bool caching = true;
};

/// Quantized inputs of one relight, as the CLI would read them from PNG.
struct FrameInputs {
  ImageF camera;
  ImageF filter;  ///< corrupted filter with the first light's shadow left out
  std::optional<ImageF> shadow;
  CascadeSchedule schedule;
};

struct FrameResult {
  std::vector<std::uint8_t> png;
  double refine_ms = 0.0;
  double total_ms = 0.0;
};

/// Scene session behind the HTTP API. Safe for concurrent use: scene updates
/// serialize on a write lock and each relight works on a snapshot.
class RelightService {
 public:
  explicit RelightService(ServiceConfig config);

  SceneSpec scene() const;
  /// Validates, replaces the scene and drops cached renders.
  void set_scene(SceneSpec scene);

  FrameInputs prepare(const RelightRequest& request) const;
  /// raw = true skips diffusion and composites the corrupted filter directly.
  FrameResult relight(const RelightRequest& request, bool raw = false) const;

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Session {
    SceneSpec scene;
    ImageF camera;  // quantized camera render under the scene's own lights
    std::shared_ptr<const CoefficientField> rgb_coeffs;
  };

  std::shared_ptr<const Session> snapshot() const;
  std::shared_ptr<const Session> build_session(const SceneSpec& scene) const;
  FrameInputs prepare_from(const Session& session, const RelightRequest& request) const;
  CoefficientField coefficients_for(const Session& session, GuidanceSource source) const;

  ServiceConfig config_;
  mutable std::shared_mutex mutex_;
  SceneSpec scene_;
  mutable std::shared_ptr<const Session> cached_;
};

/// HTTP/1.1 front end. Routes: GET/PUT /scene, POST /relight[?raw=true].
class HttpServer {
 public:
  explicit HttpServer(RelightService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Returns false when the port cannot be bound. port 0 picks a free port.
  bool bind(const std::string& host, int port);
  int port() const noexcept { return port_; }
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  RelightService& service_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
};

}  // namespace relight::service
