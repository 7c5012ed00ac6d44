#include "relight/png_io.hpp"

#include "relight/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace relight {

float quantize(float value, int bit_depth) noexcept {
  const int max_code = bit_depth == 16 ? 65535 : 255;
  const float clamped = std::clamp(value, 0.0f, 1.0f);
  const auto code = static_cast<int>(std::lround(clamped * static_cast<float>(max_code)));
  return static_cast<float>(code) / static_cast<float>(max_code);
}

ImageF quantize(const ImageF& img, int bit_depth) {
  ImageF out = img;
  for (float& v : out.data()) v = quantize(v, bit_depth);
  return out;
}

namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->pos + count > cursor->bytes.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->pos, count);
  cursor->pos += count;
}

void write_to_vector(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

void flush_noop(png_structp) {}

void silent_warning(png_structp, png_const_charp) {}

// libpng reports errors via longjmp; the message is stashed here so it can be
// rethrown as a C++ exception outside the setjmp frame.
struct ErrorSlot {
  char message[256] = {};
};

void record_error(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  png_longjmp(png, 1);
}

struct DecodedRaw {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> rows;
  std::size_t row_bytes = 0;
};

bool decode_raw(ReadCursor& cursor, DecodedRaw& raw, ErrorSlot& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, record_error, silent_warning);
  if (png == nullptr) {
    std::snprintf(err.message, sizeof(err.message), "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep>* row_ptrs = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete row_ptrs;
    return false;
  }
  png_set_read_fn(png, &cursor, read_from_memory);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  }
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (depth == 16) png_set_swap(png);  // native little-endian uint16 rows
  png_read_update_info(png, info);

  raw.width = png_get_image_width(png, info);
  raw.height = png_get_image_height(png, info);
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  raw.row_bytes = png_get_rowbytes(png, info);
  raw.rows.resize(raw.row_bytes * raw.height);
  row_ptrs->resize(raw.height);
  for (png_uint_32 r = 0; r < raw.height; ++r) (*row_ptrs)[r] = raw.rows.data() + r * raw.row_bytes;
  png_read_image(png, row_ptrs->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete row_ptrs;
  return true;
}

}  // namespace

PngImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("not a PNG file", 0);
  }
  ReadCursor cursor{bytes, 0};
  DecodedRaw raw;
  ErrorSlot err;
  if (!decode_raw(cursor, raw, err)) throw FormatError(std::string("PNG decode: ") + err.message, cursor.pos);
  if (raw.channels != 1 && raw.channels != 3) {
    throw DataError("unsupported PNG channel count " + std::to_string(raw.channels));
  }

  const int w = static_cast<int>(raw.width);
  const int h = static_cast<int>(raw.height);
  ImageF img(w, h, raw.channels);
  auto dst = img.data();
  const std::size_t per_row = static_cast<std::size_t>(w) * raw.channels;
  if (raw.bit_depth == 16) {
    for (int r = 0; r < h; ++r) {
      const std::uint8_t* row = raw.rows.data() + r * raw.row_bytes;
      for (std::size_t i = 0; i < per_row; ++i) {
        std::uint16_t code;
        std::memcpy(&code, row + 2 * i, 2);
        dst[r * per_row + i] = static_cast<float>(code) / static_cast<float>(65535);
      }
    }
  } else {
    for (int r = 0; r < h; ++r) {
      const std::uint8_t* row = raw.rows.data() + r * raw.row_bytes;
      for (std::size_t i = 0; i < per_row; ++i) {
        dst[r * per_row + i] = static_cast<float>(row[i]) / static_cast<float>(255);
      }
    }
  }
  return {std::move(img), raw.bit_depth == 16 ? 16 : 8};
}

PngImage read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

namespace {

bool encode_raw(const std::vector<png_bytep>& rows, int w, int h, int color_type, int bit_depth,
                std::vector<std::uint8_t>& out, ErrorSlot& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, record_error, silent_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageF& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("PNG bit depth must be 8 or 16");
  if (img.channels() != 1 && img.channels() != 3) {
    throw InvalidArgument("PNG output supports 1 or 3 channels");
  }
  const int w = img.width();
  const int h = img.height();
  const std::size_t per_row = static_cast<std::size_t>(w) * img.channels();
  const std::size_t bytes_per_sample = bit_depth / 8;
  const int max_code = bit_depth == 16 ? 65535 : 255;
  std::vector<std::uint8_t> buffer(per_row * h * bytes_per_sample);
  const auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float clamped = std::clamp(src[i], 0.0f, 1.0f);
    const auto code = static_cast<unsigned>(std::lround(clamped * static_cast<float>(max_code)));
    if (bit_depth == 16) {
      buffer[2 * i] = static_cast<std::uint8_t>(code >> 8);  // PNG is big-endian
      buffer[2 * i + 1] = static_cast<std::uint8_t>(code & 0xff);
    } else {
      buffer[i] = static_cast<std::uint8_t>(code);
    }
  }
  std::vector<png_bytep> rows(h);
  for (int r = 0; r < h; ++r) rows[r] = buffer.data() + r * per_row * bytes_per_sample;

  std::vector<std::uint8_t> out;
  ErrorSlot err;
  const int color_type = img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  if (!encode_raw(rows, w, h, color_type, bit_depth, out, err)) {
    throw IoError(std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const ImageF& img, int bit_depth) {
  const auto bytes = encode_png(img, bit_depth);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace relight
