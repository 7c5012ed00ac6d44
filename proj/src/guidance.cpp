#include "relight/guidance.hpp"

#include "relight/errors.hpp"
#include "relight/parallel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace relight {

static_assert(std::endian::native == std::endian::little, "GADF I/O assumes a little-endian host");

GuidanceField::GuidanceField(ImageF features, float kappa) : features_(std::move(features)), kappa_(kappa) {
  if (!(kappa > 0.0f) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive and finite");
  if (features_.empty()) throw InvalidArgument("guidance features are empty");
  if (!all_finite(features_)) throw InvalidArgument("guidance features contain non-finite values");
}

CoefficientField CoefficientField::uniform(int width, int height, float value) {
  CoefficientField field;
  field.horizontal = EdgeMap::Constant(height, width - 1, value);
  field.vertical = EdgeMap::Constant(height - 1, width, value);
  return field;
}

float coefficient(std::span<const float> gp, std::span<const float> gn, float kappa) {
  if (!(kappa > 0.0f)) throw InvalidArgument("kappa must be positive");
  if (gp.size() != gn.size()) throw DimensionMismatch("feature vectors differ in length");
  double dist2 = 0.0;
  for (std::size_t k = 0; k < gp.size(); ++k) {
    const double d = static_cast<double>(gp[k]) - static_cast<double>(gn[k]);
    dist2 += d * d;
  }
  const double k2 = static_cast<double>(kappa) * static_cast<double>(kappa);
  const auto c = static_cast<float>(k2 / (k2 + dist2));
  return std::max(c, std::numeric_limits<float>::min());
}

CoefficientField build_coefficients(const GuidanceField& guidance) {
  const ImageF& g = guidance.features();
  const int w = g.width();
  const int h = g.height();
  const float kappa = guidance.kappa();
  CoefficientField field;
  field.horizontal.resize(h, w - 1);
  field.vertical.resize(h - 1, w);
  parallel::for_rows(h, static_cast<long long>(w) * g.channels() * 2, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      for (int c = 0; c + 1 < w; ++c) field.horizontal(r, c) = coefficient(g.pixel(r, c), g.pixel(r, c + 1), kappa);
      if (r + 1 < h) {
        for (int c = 0; c < w; ++c) field.vertical(r, c) = coefficient(g.pixel(r, c), g.pixel(r + 1, c), kappa);
      }
    }
  });
  return field;
}

GuidanceField rgb_guidance(const ImageF& camera, float kappa) {
  if (camera.channels() != 3) throw InvalidArgument("RGB guidance needs a 3-channel camera image");
  return GuidanceField(camera, kappa);
}

namespace {

constexpr char kMagic[4] = {'G', 'A', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 24;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* field) {
  if (pos + sizeof(T) > bytes.size()) throw FormatError(std::string("truncated header reading ") + field, pos);
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_feature_map(const GuidanceField& guidance) {
  const ImageF& f = guidance.features();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + f.size() * sizeof(float));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.height()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.width()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.channels()));
  put<float>(out, guidance.kappa());
  const auto* payload = reinterpret_cast<const std::uint8_t*>(f.data().data());
  out.insert(out.end(), payload, payload + f.size() * sizeof(float));
  return out;
}

GuidanceField decode_feature_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated magic", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected GADF", 0);
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos, "version");
  if (version != kVersion) throw FormatError("unsupported GADF version " + std::to_string(version), 4);
  const auto height = get<std::uint32_t>(bytes, pos, "height");
  const auto width = get<std::uint32_t>(bytes, pos, "width");
  const auto channels = get<std::uint32_t>(bytes, pos, "channels");
  const auto kappa = get<float>(bytes, pos, "kappa");

  if (height == 0 || width == 0 || channels == 0) throw DataError("GADF header has a zero dimension");
  if (!(kappa > 0.0f) || !std::isfinite(kappa)) throw DataError("GADF kappa must be positive and finite");
  const std::uint64_t count = std::uint64_t{height} * width * channels;
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (count > std::numeric_limits<std::uint32_t>::max() || payload != count * sizeof(float)) {
    throw DataError("GADF header dims " + std::to_string(height) + "x" + std::to_string(width) + "x" +
                    std::to_string(channels) + " disagree with payload of " + std::to_string(payload) +
                    " bytes");
  }
  std::vector<float> data(count);
  std::memcpy(data.data(), bytes.data() + kHeaderBytes, payload);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw DataError("GADF payload has a non-finite sample at byte " + std::to_string(kHeaderBytes + 4 * i));
    }
  }
  return GuidanceField(ImageF(static_cast<int>(width), static_cast<int>(height), static_cast<int>(channels),
                              std::move(data)),
                       kappa);
}

void save_feature_map(const std::filesystem::path& path, const GuidanceField& guidance) {
  const auto bytes = encode_feature_map(guidance);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

GuidanceField load_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_feature_map(bytes);
}

}  // namespace relight
