#include "relight/diffusion.hpp"

#include "relight/errors.hpp"
#include "relight/parallel.hpp"

#include <charconv>
#include <chrono>
#include <sstream>

namespace relight {

namespace {

void check_lambda(float lambda) {
  if (!(lambda > 0.0f && lambda < 0.25f)) {
    throw InvalidArgument("lambda must lie in (0, 0.25), got " + std::to_string(lambda));
  }
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

void DiffusionParams::validate() const {
  check_lambda(lambda);
  if (iterations < 0) throw InvalidArgument("iterations must be non-negative");
}

CascadeSchedule::CascadeSchedule(std::vector<CascadeLevel> levels, float lambda, float kappa)
    : levels_(std::move(levels)), lambda_(lambda), kappa_(kappa) {
  if (levels_.empty()) throw InvalidArgument("cascade schedule needs at least one level");
  check_lambda(lambda_);
  if (!(kappa_ > 0.0f)) throw InvalidArgument("kappa must be positive");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const auto& level = levels_[i];
    if (!is_power_of_two(level.divisor)) {
      throw InvalidArgument("schedule divisor " + std::to_string(level.divisor) + " is not a power of two");
    }
    if (level.iterations < 1) throw InvalidArgument("schedule levels need at least one iteration");
    if (i > 0 && level.divisor >= levels_[i - 1].divisor) {
      throw InvalidArgument("schedule divisors must strictly decrease");
    }
  }
}

CascadeSchedule CascadeSchedule::parse(std::string_view text, float lambda, float kappa) {
  std::vector<CascadeLevel> levels;
  auto parse_int = [&](std::string_view token) {
    int value = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end) {
      throw InvalidArgument("bad integer '" + std::string(token) + "' in schedule '" + std::string(text) + "'");
    }
    return value;
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view pair = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::size_t colon = pair.find(':');
    if (colon == std::string_view::npos) {
      throw InvalidArgument("schedule entry '" + std::string(pair) + "' is not divisor:iterations");
    }
    levels.push_back({parse_int(pair.substr(0, colon)), parse_int(pair.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return CascadeSchedule(std::move(levels), lambda, kappa);
}

int CascadeSchedule::total_steps() const noexcept {
  int total = 0;
  for (const auto& level : levels_) total += level.iterations;
  return total;
}

std::string CascadeSchedule::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (i > 0) out << ',';
    out << levels_[i].divisor << ':' << levels_[i].iterations;
  }
  return out.str();
}

ImageF step(const ImageF& y, const CoefficientField& coeffs, float lambda) {
  check_lambda(lambda);
  const int w = y.width();
  const int h = y.height();
  if (coeffs.horizontal.rows() != h || coeffs.horizontal.cols() != w - 1 || coeffs.vertical.rows() != h - 1 ||
      coeffs.vertical.cols() != w) {
    throw DimensionMismatch("coefficient field does not match image size");
  }
  const int ch = y.channels();
  const double lam = lambda;
  ImageF out(w, h, ch);
  const auto src = y.data();
  auto dst = out.data();
  const auto& hz = coeffs.horizontal;
  const auto& vt = coeffs.vertical;
  const std::size_t stride = static_cast<std::size_t>(w) * ch;

  parallel::for_rows(h, static_cast<long long>(w) * ch, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t p = (static_cast<std::size_t>(r) * w + c) * ch;
        const double cl = c > 0 ? hz(r, c - 1) : 0.0;
        const double cr = c + 1 < w ? hz(r, c) : 0.0;
        const double cu = r > 0 ? vt(r - 1, c) : 0.0;
        const double cd = r + 1 < h ? vt(r, c) : 0.0;
        for (int k = 0; k < ch; ++k) {
          const double yp = src[p + k];
          double flux = 0.0;
          if (c > 0) flux += (src[p + k - ch] - yp) * cl;
          if (c + 1 < w) flux += (src[p + k + ch] - yp) * cr;
          if (r > 0) flux += (src[p + k - stride] - yp) * cu;
          if (r + 1 < h) flux += (src[p + k + stride] - yp) * cd;
          dst[p + k] = static_cast<float>(yp + lam * flux);
        }
      }
    }
  });
  return out;
}

ImageF run(const ImageF& y0, const CoefficientField& coeffs, const DiffusionParams& params) {
  params.validate();
  ImageF y = y0;
  for (int t = 0; t < params.iterations; ++t) y = step(y, coeffs, params.lambda);
  return y;
}

ImageF reference_run(const ImageF& y0, const GuidanceField& guidance, const DiffusionParams& params) {
  params.validate();
  const ImageF& g = guidance.features();
  if (g.width() != y0.width() || g.height() != y0.height()) {
    throw DimensionMismatch("guidance does not match image size");
  }
  const int w = y0.width();
  const int h = y0.height();
  const int ch = y0.channels();
  const double lam = params.lambda;
  ImageF prev = y0;
  ImageF next = y0;
  for (int t = 0; t < params.iterations; ++t) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        for (int k = 0; k < ch; ++k) {
          const double yp = prev.at(r, c, k);
          double flux = 0.0;
          // Neighbour order (left, right, up, down) fixes the summation order.
          if (c > 0) {
            const double cf = coefficient(g.pixel(r, c), g.pixel(r, c - 1), guidance.kappa());
            flux += (prev.at(r, c - 1, k) - yp) * cf;
          }
          if (c + 1 < w) {
            const double cf = coefficient(g.pixel(r, c), g.pixel(r, c + 1), guidance.kappa());
            flux += (prev.at(r, c + 1, k) - yp) * cf;
          }
          if (r > 0) {
            const double cf = coefficient(g.pixel(r, c), g.pixel(r - 1, c), guidance.kappa());
            flux += (prev.at(r - 1, c, k) - yp) * cf;
          }
          if (r + 1 < h) {
            const double cf = coefficient(g.pixel(r, c), g.pixel(r + 1, c), guidance.kappa());
            flux += (prev.at(r + 1, c, k) - yp) * cf;
          }
          next.at(r, c, k) = static_cast<float>(yp + lam * flux);
        }
      }
    }
    std::swap(prev, next);
  }
  return prev;
}

CoefficientField pool_coefficients(const CoefficientField& full, int divisor) {
  if (!is_power_of_two(divisor)) throw InvalidArgument("pooling divisor must be a power of two");
  if (divisor == 1) return full;
  const int level_w = ceil_div(full.width(), divisor);
  const int level_h = ceil_div(full.height(), divisor);
  // Pooled horizontal column C covers full-resolution edges [C*d, C*d + d - 1]:
  // the edges inside block C plus the one crossing into block C+1.
  const EdgeMap hz = min_pool(full.horizontal, divisor);
  const EdgeMap vt = min_pool(full.vertical, divisor);
  CoefficientField level;
  level.horizontal = hz.block(0, 0, level_h, level_w - 1);
  level.vertical = vt.block(0, 0, level_h - 1, level_w);
  return level;
}

ImageF cascade(const ImageF& y0, const GuidanceField& guidance, const CascadeSchedule& schedule,
               CascadeStats* stats) {
  if (guidance.width() != y0.width() || guidance.height() != y0.height()) {
    throw DimensionMismatch("guidance does not match image size");
  }
  const auto start = Clock::now();
  const CoefficientField full = build_coefficients(guidance);
  const double build_ms = elapsed_ms(start);
  ImageF result = cascade(y0, full, schedule, stats);
  if (stats != nullptr) stats->coefficient_ms += build_ms;
  return result;
}

ImageF cascade(const ImageF& y0, const CoefficientField& full, const CascadeSchedule& schedule,
               CascadeStats* stats) {
  if (full.width() != y0.width() || full.height() != y0.height()) {
    throw DimensionMismatch("coefficient field does not match image size");
  }
  CascadeStats local;
  const auto& levels = schedule.levels();
  const int full_w = y0.width();
  const int full_h = y0.height();

  auto t0 = Clock::now();
  ImageF y = downsample_box(y0, levels.front().divisor);
  local.resample_ms += elapsed_ms(t0);

  for (std::size_t i = 0; i < levels.size(); ++i) {
    const CascadeLevel& level = levels[i];
    t0 = Clock::now();
    const CoefficientField coeffs = pool_coefficients(full, level.divisor);
    local.coefficient_ms += elapsed_ms(t0);

    t0 = Clock::now();
    y = run(y, coeffs, {schedule.lambda(), level.iterations});
    local.diffusion_ms += elapsed_ms(t0);
    local.levels.push_back({level.divisor, y.width(), y.height(), level.iterations});
    local.total_steps += level.iterations;
    if (level.divisor == 1) local.full_resolution_steps += level.iterations;

    const int next_divisor = i + 1 < levels.size() ? levels[i + 1].divisor : 1;
    if (next_divisor != level.divisor) {
      t0 = Clock::now();
      const int factor = level.divisor / next_divisor;
      y = crop(upsample_bilinear(y, factor), ceil_div(full_w, next_divisor), ceil_div(full_h, next_divisor));
      local.resample_ms += elapsed_ms(t0);
    }
  }
  if (stats != nullptr) *stats = std::move(local);
  return y;
}

}  // namespace relight
