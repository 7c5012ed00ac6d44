#include "relight/cli.hpp"

#include "relight/bench.hpp"
#include "relight/compose.hpp"
#include "relight/errors.hpp"
#include "relight/parallel.hpp"
#include "relight/png_io.hpp"
#include "relight/scene_json.hpp"
#include "relight/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace relight::cli {

namespace fs = std::filesystem;

namespace {

/// Thrown for flag values that parse but fail validation.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RelightOptions {
  std::string rgb;
  std::string filter;
  std::string shadow;
  std::string guidance = "rgb";
  std::string schedule{kDefaultSchedule};
  float lambda = kDefaultLambda;
  float kappa = kDefaultKappa;
  bool kappa_set = false;
  int shadow_iters = ShadowParams{}.iterations;
  int bit_depth = 0;
  std::string out;
};

struct SynthOptions {
  std::string kind = "mesh-error-correction";
  int count = 1;
  int resolution = 256;
  int error_shift = ErrorModel::defaults().silhouette_shift;
  int error_dilate = ErrorModel::defaults().dilation;
  double error_noise = ErrorModel::defaults().noise_amplitude;
  std::string out_dir;
};

struct BenchOptions {
  std::string benchmark = "1";
  int count = 50;
  std::string schedule{kBenchmarkSchedule};
  std::string csv;
  int resolution = 256;
  std::string guidance = "rgb";
  int repetitions = 5;
};

struct ServeOptions {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string scene;
  std::string features;
  bool no_cache = false;
};

ImageF as_rgb(const ImageF& img) { return img.channels() == 1 ? broadcast_channels(img, 3) : img; }

int relight_cmd(const RelightOptions& opt, std::uint64_t, std::ostream&, std::ostream& err) {
  // Flags first, no I/O yet.
  const CascadeSchedule schedule = [&] {
    try {
      return CascadeSchedule::parse(opt.schedule, opt.lambda, opt.kappa);
    } catch (const InvalidArgument& e) {
      throw FlagError(std::string("--schedule/--lambda/--kappa: ") + e.what());
    }
  }();
  if (opt.shadow_iters < 1) throw FlagError("--shadow-iters must be at least 1");
  if (opt.bit_depth != 0 && opt.bit_depth != 8 && opt.bit_depth != 16) throw FlagError("--bit-depth must be 8 or 16");
  std::optional<std::string> gadf_path;
  if (opt.guidance.rfind("gadf:", 0) == 0) {
    gadf_path = opt.guidance.substr(5);
    if (gadf_path->empty()) throw FlagError("--guidance gadf: needs a path");
  } else if (opt.guidance != "rgb") {
    throw FlagError("--guidance must be 'rgb' or 'gadf:<path>'");
  }

  const PngImage camera = read_png(opt.rgb);
  const PngImage filter = read_png(opt.filter);
  std::optional<ImageF> shadow;
  if (!opt.shadow.empty()) {
    ImageF s = read_png(opt.shadow).image;
    shadow = s.channels() == 1 ? s : extract_channel(s, 0);
  }
  if (camera.image.channels() != 3) {
    err << "relight: --rgb must be a 3-channel image\n";
    return kDimensionMismatch;
  }
  std::optional<GuidanceField> guidance;
  if (gadf_path) {
    guidance = load_feature_map(*gadf_path);
    if (opt.kappa_set) guidance = GuidanceField(guidance->features(), opt.kappa);
  } else {
    guidance = rgb_guidance(camera.image, opt.kappa);
  }
  if (guidance->width() != camera.image.width() || guidance->height() != camera.image.height()) {
    err << "relight: guidance is " << guidance->width() << "x" << guidance->height() << " but --rgb is "
        << camera.image.width() << "x" << camera.image.height() << '\n';
    return kDimensionMismatch;
  }
  const RelightInputs inputs{camera.image, as_rgb(filter.image), shadow};
  const ImageF result = relight(inputs, build_coefficients(*guidance), schedule,
                                ShadowParams{opt.shadow_iters, opt.lambda});
  write_png(opt.out, result, opt.bit_depth == 0 ? camera.bit_depth : opt.bit_depth);
  return kOk;
}

int synth_cmd(const SynthOptions& opt, std::uint64_t seed, std::ostream& out, std::ostream&) {
  if (opt.count < 1) throw FlagError("--count must be at least 1");
  if (opt.resolution < 8) throw FlagError("--resolution must be at least 8");
  ErrorModel model{opt.error_shift, opt.error_dilate, opt.error_noise, 0};
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw FlagError(e.what());
  }
  const BenchmarkKind kind = [&] {
    try {
      return parse_benchmark_kind(opt.kind);
    } catch (const InvalidArgument& e) {
      throw FlagError(e.what());
    }
  }();

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec || !fs::is_directory(opt.out_dir)) throw IoError("cannot create output directory " + opt.out_dir);

  const auto scenes = benchmark_suite(kind, opt.count, seed, opt.resolution);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "scene_%03zu", i);
    const fs::path base = fs::path(opt.out_dir) / stem;
    const RenderOutput frame = render(scenes[i]);
    ErrorModel errors = model;
    errors.noise_seed = seed + i;
    write_png(base.string() + "_camera.png", frame.camera, 16);
    write_png(base.string() + "_filter.png", frame.filter, 16);
    write_png(base.string() + "_filter_corrupt.png", corrupt(frame.filter, frame.depth, errors), 16);
    write_png(base.string() + "_shadow.png", frame.shadow, 16);
    save_scene(base.string() + ".json", scenes[i]);
    out << base.string() << '\n';
  }
  return kOk;
}

int bench_cmd(const BenchOptions& opt, std::uint64_t seed, std::ostream& out, std::ostream&) {
  if (opt.count < 1) throw FlagError("--count must be at least 1");
  if (opt.repetitions < 1) throw FlagError("--repetitions must be at least 1");
  if (opt.benchmark == "speed") {
    const RelightInputs input = speed_ablation_input(seed, 512);
    const SpeedAblation ablation = run_speed_ablation(input, rgb_guidance(input.camera), opt.repetitions);
    print_speed_ablation(out, ablation);
    if (!opt.csv.empty()) {
      std::ofstream csv(opt.csv);
      if (!csv) throw IoError("cannot open " + opt.csv + " for writing");
      csv << "config,schedule,steps,time_ms,diffusion_ms,resample_ms,ssim_filter,ssim_relit\n";
      for (const auto& row : ablation.rows) {
        csv << row.name << ',' << row.schedule << ',' << row.steps << ',' << row.time_ms << ',' << row.diffusion_ms
            << ',' << row.resample_ms << ',' << row.ssim_filter << ',' << row.ssim_composite << '\n';
      }
    }
    return kOk;
  }
  if (opt.benchmark == "shadow") {
    const ShadowSweep sweep = run_shadow_sweep(opt.resolution);
    out << "shadow pass IoU on the flat-wall scene\n";
    for (const auto& row : sweep.shadow_pass) out << "  iterations " << row.iterations << ": " << row.iou << '\n';
    out << "  full cascade (" << kDefaultSchedule << "): " << sweep.cascade_iou << '\n';
    return kOk;
  }

  BenchmarkConfig config;
  try {
    config.kind = parse_benchmark_kind(opt.benchmark);
    config.schedule = CascadeSchedule::parse(opt.schedule);
    config.guidance = parse_guidance_mode(opt.guidance);
  } catch (const InvalidArgument& e) {
    throw FlagError(e.what());
  }
  config.count = opt.count;
  config.seed = seed;
  config.resolution = opt.resolution;
  const MetricReport report = run_benchmark(config);
  print_report(out, report);
  if (!opt.csv.empty()) {
    std::ofstream csv(opt.csv);
    if (!csv) throw IoError("cannot open " + opt.csv + " for writing");
    write_csv(csv, report);
    if (!csv) throw IoError("write failed for " + opt.csv);
  }
  return kOk;
}

int serve_cmd(const ServeOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.port < 0 || opt.port > 65535) throw FlagError("--port out of range");
  service::ServiceConfig config;
  try {
    config.scene = load_scene(opt.scene);
  } catch (const SchemaError& e) {
    err << "serve: invalid scene: " << e.what() << '\n';
    return kInvalidFlags;
  }
  if (!opt.features.empty()) config.features = load_feature_map(opt.features);
  config.caching = !opt.no_cache;
  service::RelightService svc(std::move(config));
  service::HttpServer server(svc);

  // Handle SIGINT/SIGTERM on a dedicated thread; worker threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  if (!server.bind(opt.host, opt.port)) {
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    err << "serve: cannot bind " << opt.host << ":" << opt.port << '\n';
    return kIoError;
  }
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    const timespec tick{0, 200'000'000};
    while (!done) {
      if (sigtimedwait(&signals, nullptr, &tick) > 0) {
        server.stop();
        return;
      }
    }
  });
  out << "listening on http://" << opt.host << ":" << server.port() << std::endl;
  server.listen();
  done = true;
  watcher.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  err << "serve: shut down\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guided anisotropic diffusion relighting"};
  app.require_subcommand(1);
  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware, 1 = sequential)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Seed for scene synthesis and corruption");

  RelightOptions rel;
  auto* relight_app = app.add_subcommand("relight", "Refine a relight filter and composite it with a camera frame");
  relight_app->add_option("--rgb", rel.rgb, "Camera RGB PNG")->required();
  relight_app->add_option("--filter", rel.filter, "Relight filter PNG")->required();
  relight_app->add_option("--shadow", rel.shadow, "Optional single-channel shadow PNG");
  relight_app->add_option("--guidance", rel.guidance, "'rgb' or 'gadf:<path>'");
  relight_app->add_option("--schedule", rel.schedule, "divisor:iterations list, coarsest first");
  relight_app->add_option("--lambda", rel.lambda, "Diffusion step size in (0, 0.25)");
  auto* kappa_opt = relight_app->add_option("--kappa", rel.kappa, "Edge sensitivity");
  relight_app->add_option("--shadow-iters", rel.shadow_iters, "Shadow-pass iterations");
  relight_app->add_option("--bit-depth", rel.bit_depth, "Output PNG depth (default: that of --rgb)");
  relight_app->add_option("--out", rel.out, "Output PNG")->required();

  SynthOptions syn;
  auto* synth_app = app.add_subcommand("synth", "Render synthetic camera/filter/shadow tuples");
  synth_app->add_option("--kind", syn.kind, "mesh-error-correction | multi-lighting | fidelity");
  synth_app->add_option("--count", syn.count, "Number of scenes");
  synth_app->add_option("--resolution", syn.resolution, "Square image size");
  synth_app->add_option("--error-shift", syn.error_shift, "Silhouette shift in pixels");
  synth_app->add_option("--error-dilate", syn.error_dilate, "Silhouette dilation in pixels");
  synth_app->add_option("--error-noise", syn.error_noise, "Boundary noise amplitude");
  synth_app->add_option("--out-dir", syn.out_dir, "Output directory")->required();

  BenchOptions ben;
  auto* bench_app = app.add_subcommand("bench", "Run a benchmark or ablation");
  bench_app->add_option("--benchmark", ben.benchmark, "1 | 2 | 3 | speed | shadow");
  bench_app->add_option("--count", ben.count, "Scenes per benchmark");
  bench_app->add_option("--schedule", ben.schedule, "Cascade schedule");
  bench_app->add_option("--csv", ben.csv, "Write per-scene rows to this CSV");
  bench_app->add_option("--resolution", ben.resolution, "Square image size");
  bench_app->add_option("--guidance", ben.guidance, "rgb | synthetic");
  bench_app->add_option("--repetitions", ben.repetitions, "Timed repetitions for the speed ablation");

  ServeOptions srv;
  auto* serve_app = app.add_subcommand("serve", "Serve the relight HTTP API");
  serve_app->add_option("--port", srv.port, "TCP port");
  serve_app->add_option("--host", srv.host, "Bind address");
  serve_app->add_option("--scene", srv.scene, "Scene JSON")->required();
  serve_app->add_option("--features", srv.features, "GADF feature map for guidance-mode gadf");
  serve_app->add_flag("--no-cache", srv.no_cache, "Rebuild camera render and coefficients per request");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    CLI::App* sub = nullptr;
    for (auto* candidate : app.get_subcommands()) sub = candidate;
    err << (sub != nullptr ? sub->help() : app.help());
    return kInvalidFlags;
  }
  rel.kappa_set = kappa_opt->count() > 0;
  parallel::set_thread_count(threads);

  try {
    if (*relight_app) return relight_cmd(rel, seed, out, err);
    if (*synth_app) return synth_cmd(syn, seed, out, err);
    if (*bench_app) return bench_cmd(ben, seed, out, err);
    if (*serve_app) return serve_cmd(srv, out, err);
  } catch (const FlagError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidFlags;
  } catch (const DimensionMismatch& e) {
    err << "error: dimension mismatch: " << e.what() << '\n';
    return kDimensionMismatch;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidFlags;
  }
  return kInvalidFlags;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace relight::cli
