#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "physdepth/errors.hpp"
#include "physdepth/raster.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

namespace detail {

struct PngRows {
  int width = 0;
  int height = 0;
  int channels = 0;   // after transformations: 1 (gray) or 3 (rgb)
  int bit_depth = 0;  // 8 or 16 (16 only for gray)
  std::vector<std::uint8_t> bytes;  // row-major, big-endian for 16-bit
};

inline PngRows read_png_rows(const std::string& path, bool expand_color) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("png: cannot open '" + path + "'");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("png: out of memory");
  }

  PngRows out;
  std::vector<png_bytep> row_pointers;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw ParseError("png: failed to decode '" + path + "'");
  }

  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (expand_color) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  const int channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.bit_depth = bit_depth;
  out.bytes.resize(row_bytes * height);
  row_pointers.resize(height);
  for (png_uint_32 y = 0; y < height; ++y)
    row_pointers[y] = out.bytes.data() + static_cast<std::size_t>(y) * row_bytes;

  png_read_image(png, row_pointers.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return out;
}

inline void write_png_rows(const std::string& path, int width, int height, int bit_depth,
                           int color_type, const std::vector<std::uint8_t>& bytes,
                           std::size_t row_bytes) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("png: cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("png: out of memory");
  }

  std::vector<png_bytep> row_pointers(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    row_pointers[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * row_bytes);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("png: failed to encode '" + path + "'");
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_pointers.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace detail

/// Class-ID raster from a single-channel 8- or 16-bit PNG.
inline LabelMap read_label_png(const std::string& path) {
  const detail::PngRows rows = detail::read_png_rows(path, /*expand_color=*/false);
  if (rows.channels != 1)
    throw ParseError("png: label map '" + path + "' must be single-channel");
  if (rows.bit_depth != 8 && rows.bit_depth != 16)
    throw ParseError("png: label map '" + path + "' must be 8- or 16-bit");
  LabelMap map(rows.width, rows.height, 0);
  if (rows.bit_depth == 8) {
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = rows.bytes[i];
  } else {
    for (std::size_t i = 0; i < map.size(); ++i) {
      // PNG 16-bit samples are big-endian.
      map[i] = (static_cast<std::int32_t>(rows.bytes[2 * i]) << 8) | rows.bytes[2 * i + 1];
    }
  }
  return map;
}

/// Intensity image from an 8-bit gray or color PNG, scaled to [0, 1] by /255.
inline ImageBuffer read_image_png(const std::string& path) {
  const detail::PngRows rows = detail::read_png_rows(path, /*expand_color=*/true);
  if (rows.bit_depth != 8) throw ParseError("png: image '" + path + "' must be 8-bit");
  if (rows.channels != 1 && rows.channels != 3)
    throw ParseError("png: image '" + path + "' must be gray or RGB");
  ImageBuffer img(rows.width, rows.height, rows.channels);
  std::size_t i = 0;
  for (int y = 0; y < rows.height; ++y)
    for (int x = 0; x < rows.width; ++x)
      for (int c = 0; c < rows.channels; ++c)
        img.set(x, y, c, rows.bytes[i++] / 255.0);
  return img;
}

inline void write_gray8_png(const std::string& path, const Raster<std::uint8_t>& raster) {
  if (raster.empty()) throw InvalidInput("png: empty raster");
  std::vector<std::uint8_t> bytes(raster.begin(), raster.end());
  detail::write_png_rows(path, raster.width(), raster.height(), 8, PNG_COLOR_TYPE_GRAY, bytes,
                         static_cast<std::size_t>(raster.width()));
}

inline void write_gray16_png(const std::string& path, const Raster<std::uint16_t>& raster) {
  if (raster.empty()) throw InvalidInput("png: empty raster");
  std::vector<std::uint8_t> bytes(raster.size() * 2);
  for (std::size_t i = 0; i < raster.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(raster[i] >> 8);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(raster[i] & 0xff);
  }
  detail::write_png_rows(path, raster.width(), raster.height(), 16, PNG_COLOR_TYPE_GRAY, bytes,
                         static_cast<std::size_t>(raster.width()) * 2);
}

inline void write_rgb8_png(const std::string& path, const ImageBuffer& image) {
  if (image.empty()) throw InvalidInput("png: empty image");
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(image.width()) * image.height() * 3);
  std::size_t i = 0;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = image.at(x, y, image.channels() == 3 ? c : 0);
        bytes[i++] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  detail::write_png_rows(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, bytes,
                         static_cast<std::size_t>(image.width()) * 3);
}

/// Lossy human-readable preview: near depths warm, far depths dark blue,
/// invalid pixels black.
inline void write_depth_preview_png(const std::string& path, const DepthMap& map) {
  if (map.empty()) throw InvalidInput("png: empty depth map");
  float max_value = 0.0f;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (map.valid(x, y)) max_value = std::max(max_value, map.value(x, y));
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(map.width()) * map.height() * 3, 0);
  std::size_t i = 0;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      if (!map.valid(x, y) || max_value <= 0.0f) {
        i += 3;
        continue;
      }
      const double t = std::min(1.0, static_cast<double>(map.value(x, y)) / max_value);
      bytes[i++] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
      bytes[i++] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t) * t * 4.0 * 0.6));
      bytes[i++] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
  detail::write_png_rows(path, map.width(), map.height(), 8, PNG_COLOR_TYPE_RGB, bytes,
                         static_cast<std::size_t>(map.width()) * 3);
}

}  // namespace physdepth
