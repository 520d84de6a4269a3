#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "physdepth/errors.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

// PFD1 depth file: magic "PFD1", u32 width, u32 height (little endian),
// width*height f32 depths row-major from the top row, then width*height u8
// provenance codes. A pixel is valid iff its provenance code is non-zero;
// invalid pixels store depth 0.

namespace detail {

inline void put_u32_le(std::ostream& os, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(bytes, 4);
}

inline void put_f32_le(std::ostream& os, float v) {
  put_u32_le(os, std::bit_cast<std::uint32_t>(v));
}

inline std::uint32_t get_u32_le(std::istream& is) {
  unsigned char bytes[4];
  is.read(reinterpret_cast<char*>(bytes), 4);
  if (!is) throw ParseError("pfd: truncated file");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace detail

inline void write_pfd(std::ostream& os, const DepthMap& map) {
  if (map.empty()) throw InvalidInput("pfd: cannot write an empty depth map");
  os.write("PFD1", 4);
  detail::put_u32_le(os, static_cast<std::uint32_t>(map.width()));
  detail::put_u32_le(os, static_cast<std::uint32_t>(map.height()));
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      detail::put_f32_le(os, map.valid(x, y) ? map.value(x, y) : 0.0f);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const char code = static_cast<char>(map.provenance(x, y));
      os.write(&code, 1);
    }
  if (!os) throw IoError("pfd: write failed");
}

inline void write_pfd(const std::string& path, const DepthMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("pfd: cannot open '" + path + "' for writing");
  write_pfd(os, map);
}

inline DepthMap read_pfd(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PFD1", 4) != 0)
    throw ParseError("pfd: bad magic, not a PFD1 file");
  const std::uint32_t width = detail::get_u32_le(is);
  const std::uint32_t height = detail::get_u32_le(is);
  if (width == 0 || height == 0) throw ParseError("pfd: zero dimension");
  const std::size_t count = static_cast<std::size_t>(width) * height;

  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i)
    values[i] = std::bit_cast<float>(detail::get_u32_le(is));
  std::vector<unsigned char> codes(count);
  is.read(reinterpret_cast<char*>(codes.data()), static_cast<std::streamsize>(count));
  if (!is) throw ParseError("pfd: truncated file");

  DepthMap map(static_cast<int>(width), static_cast<int>(height));
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (codes[i] == 0) continue;
      if (codes[i] > static_cast<unsigned char>(Provenance::external))
        throw ParseError("pfd: unknown provenance code " + std::to_string(codes[i]));
      if (!(values[i] > 0.0f) || !std::isfinite(values[i]))
        throw ParseError("pfd: valid pixel with non-positive depth");
      map.set(x, y, values[i], static_cast<Provenance>(codes[i]));
    }
  return map;
}

inline DepthMap read_pfd(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("pfd: cannot open '" + path + "'");
  return read_pfd(is);
}

}  // namespace physdepth
