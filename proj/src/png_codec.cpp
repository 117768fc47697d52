#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "priorfill/io.hpp"
#include "priorfill/random.hpp"

namespace priorfill {

namespace {

// libpng reports errors by longjmp. The functions that call setjmp keep only
// trivially destructible locals; everything with a destructor lives in the
// caller and is passed in by pointer.

struct ReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

struct DecodedImage {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> pixels;  // packed rows, big-endian samples
  char error[128] = {};
};

void read_callback(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->size) png_error(png, "unexpected end of data");
  std::memcpy(out, src->data + src->pos, len);
  src->pos += len;
}

void error_callback(png_structp png, png_const_charp msg) {
  auto* img = static_cast<DecodedImage*>(png_get_error_ptr(png));
  std::strncpy(img->error, msg, sizeof(img->error) - 1);
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

// Returns false on failure with img->error set. Row pointers are allocated
// by the caller after the header pass, so decoding runs in two calls.
bool decode_header(png_structp png, png_infop info, ReadSource* src, DecodedImage* img) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, src, read_callback);
  png_read_info(png, info);
  png_uint_32 w = 0, h = 0;
  int depth = 0, color = 0, interlace = 0;
  png_get_IHDR(png, info, &w, &h, &depth, &color, &interlace, nullptr, nullptr);
  img->width = static_cast<int>(w);
  img->height = static_cast<int>(h);
  img->bit_depth = depth;
  img->color_type = color;
  if (interlace != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);
  return true;
}

bool decode_rows(png_structp png, png_infop info, png_bytepp rows, DecodedImage* img) {
  (void)img;
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, info);
  return true;
}

DecodedImage decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(Errc::BadImage, "not a PNG stream");
  }
  DecodedImage img;
  ReadSource src{bytes.data(), bytes.size(), 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &img, error_callback,
                                           warning_callback);
  if (!png) throw Error(Errc::BadImage, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(Errc::BadImage, "png_create_info_struct failed");
  }
  bool ok = decode_header(png, info, &src, &img);
  if (ok) {
    const std::size_t stride = png_get_rowbytes(png, info);
    img.pixels.assign(stride * static_cast<std::size_t>(img.height), 0);
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = img.pixels.data() + stride * y;
    ok = decode_rows(png, info, rows.data(), &img);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw Error(Errc::BadImage, std::string("PNG decode failed: ") + img.error);
  return img;
}

struct WriteSink {
  std::vector<std::uint8_t>* out;
};

void write_callback(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + len);
}

void flush_callback(png_structp) {}

bool encode_rows(png_structp png, png_infop info, WriteSink* sink, int w, int h, int depth,
                 png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, sink, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, info);
  return true;
}

// Samples are already in PNG byte order (big-endian for 16-bit).
Bytes encode_gray(int w, int h, int depth, std::vector<std::uint8_t>& packed) {
  Bytes out;
  WriteSink sink{&out};
  DecodedImage err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, error_callback,
                                            warning_callback);
  if (!png) throw Error(Errc::BadImage, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::BadImage, "png_create_info_struct failed");
  }
  const std::size_t stride = static_cast<std::size_t>(w) * (depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = packed.data() + stride * y;
  const bool ok = encode_rows(png, info, &sink, w, h, depth, rows.data());
  png_destroy_write_struct(&png, &info);
  if (!ok) throw Error(Errc::BadImage, std::string("PNG encode failed: ") + err.error);
  return out;
}

}  // namespace

DepthMap read_depth_png16(std::span<const std::uint8_t> bytes, double scale_mm_per_unit) {
  if (!(scale_mm_per_unit > 0.0) || !std::isfinite(scale_mm_per_unit)) {
    throw Error(Errc::NonPositiveScale, "depth scale must be > 0");
  }
  const DecodedImage img = decode(bytes);
  if (img.bit_depth != 16 || img.color_type != PNG_COLOR_TYPE_GRAY) {
    throw Error(Errc::BadImage, "depth PNG must be 16-bit single-channel");
  }
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  std::vector<float> depth(n, 0.0f);
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned raw = (static_cast<unsigned>(img.pixels[2 * i]) << 8) | img.pixels[2 * i + 1];
    if (raw == 0) continue;
    depth[i] = static_cast<float>(raw * scale_mm_per_unit / 1000.0);
    mask[i] = 1;
  }
  return DepthMap(img.width, img.height, std::move(depth), std::move(mask));
}

Png16Encoding write_depth_png16(const DepthMap& map, double scale_mm_per_unit) {
  if (!(scale_mm_per_unit > 0.0) || !std::isfinite(scale_mm_per_unit)) {
    throw Error(Errc::NonPositiveScale, "depth scale must be > 0");
  }
  Png16Encoding enc;
  std::vector<std::uint8_t> packed(map.size() * 2, 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!map.valid(i)) continue;
    long long raw = round_half_even(static_cast<double>(map[i]) * 1000.0 / scale_mm_per_unit);
    if (raw < 1 || raw > 65535) {
      raw = std::clamp(raw, 1LL, 65535LL);
      ++enc.clamped;
    }
    packed[2 * i] = static_cast<std::uint8_t>(raw >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(raw & 0xff);
  }
  enc.bytes = encode_gray(map.width(), map.height(), 16, packed);
  return enc;
}

ValidityMask read_mask_png(std::span<const std::uint8_t> bytes) {
  const DecodedImage img = decode(bytes);
  if (img.bit_depth != 8 || img.color_type != PNG_COLOR_TYPE_GRAY) {
    throw Error(Errc::BadImage, "mask PNG must be 8-bit single-channel");
  }
  std::vector<std::uint8_t> bits(img.pixels.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = img.pixels[i] >= 128 ? 1 : 0;
  return ValidityMask(img.width, img.height, std::move(bits));
}

Bytes write_gray8_png(int width, int height, std::span<const std::uint8_t> pixels) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(Errc::DimensionMismatch, "gray8 buffer does not match dimensions");
  }
  std::vector<std::uint8_t> packed(pixels.begin(), pixels.end());
  return encode_gray(width, height, 8, packed);
}

Bytes visualize_png(const Grid& grid, double max_value) {
  std::vector<std::uint8_t> px(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = max_value > 0.0 ? std::clamp(grid[i] / max_value, 0.0, 1.0) : 0.0;
    px[i] = static_cast<std::uint8_t>(std::lround(u * 255.0));
  }
  return write_gray8_png(grid.width(), grid.height(), px);
}

}  // namespace priorfill
