#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "physdepth/errors.hpp"
#include "physdepth/raster.hpp"

namespace physdepth {

/// Which pipeline stage produced a depth value. Code 0 doubles as the
/// invalid marker.
enum class Provenance : std::uint8_t {
  none = 0,
  road = 1,
  flat = 2,
  edge_extended = 3,
  inpainted = 4,
  sky = 5,
  external = 6,
};

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::none: return "none";
    case Provenance::road: return "road";
    case Provenance::flat: return "flat";
    case Provenance::edge_extended: return "edge_extended";
    case Provenance::inpainted: return "inpainted";
    case Provenance::sky: return "sky";
    case Provenance::external: return "external";
  }
  return "none";
}

/// Per-pixel metric depth with validity and provenance. Valid pixels hold a
/// positive finite value; invalid pixels hold 0 and provenance none.
class DepthMap {
 public:
  DepthMap() = default;

  DepthMap(int width, int height)
      : values_(width, height, 0.0f), provenance_(width, height, std::uint8_t{0}) {}

  int width() const { return values_.width(); }
  int height() const { return values_.height(); }
  bool empty() const { return values_.empty(); }

  bool valid(int x, int y) const { return provenance_.at(x, y) != 0; }
  float value(int x, int y) const { return values_.at(x, y); }
  Provenance provenance(int x, int y) const {
    return static_cast<Provenance>(provenance_.at(x, y));
  }

  void set(int x, int y, double meters, Provenance origin) {
    if (origin == Provenance::none) {
      invalidate(x, y);
      return;
    }
    const float stored = static_cast<float>(meters);
    if (!(meters > 0.0) || !std::isfinite(stored))
      throw InvalidInput("depth map: valid pixels need a positive finite depth");
    values_.at(x, y) = stored;
    provenance_.at(x, y) = static_cast<std::uint8_t>(origin);
  }

  void invalidate(int x, int y) {
    values_.at(x, y) = 0.0f;
    provenance_.at(x, y) = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::uint8_t p : provenance_) n += p != 0;
    return n;
  }

  const Raster<float>& values() const { return values_; }
  const Raster<std::uint8_t>& provenance_codes() const { return provenance_; }

  bool operator==(const DepthMap&) const = default;

 private:
  Raster<float> values_;
  Raster<std::uint8_t> provenance_;
};

/// Per-pixel semantic class IDs.
using LabelMap = Raster<std::int32_t>;

/// Per-pixel weight in [0, 1].
using ConfidenceMap = Raster<float>;

/// Semantic buckets the depth pipeline cares about.
enum class Category : std::uint8_t { road, flat, vertical, sky, ignore };

inline const char* to_string(Category c) {
  switch (c) {
    case Category::road: return "road";
    case Category::flat: return "flat";
    case Category::vertical: return "vertical";
    case Category::sky: return "sky";
    case Category::ignore: return "ignore";
  }
  return "ignore";
}

inline Category category_from_string(const std::string& s) {
  if (s == "road") return Category::road;
  if (s == "flat") return Category::flat;
  if (s == "vertical") return Category::vertical;
  if (s == "sky") return Category::sky;
  if (s == "ignore") return Category::ignore;
  throw ParseError("unknown category '" + s + "'");
}

/// Total mapping from class IDs to categories. IDs not declared here fall
/// back to ignore.
class LabelSchema {
 public:
  struct Entry {
    int id = 0;
    std::string name;
    Category category = Category::ignore;
  };

  LabelSchema() = default;

  explicit LabelSchema(std::vector<Entry> entries) : entries_(std::move(entries)) {
    for (const Entry& e : entries_) {
      if (!lookup_.emplace(e.id, e.category).second)
        throw InvalidInput("label schema: duplicate class id " + std::to_string(e.id));
    }
  }

  bool contains(int id) const { return lookup_.count(id) != 0; }

  Category category(int id) const {
    const auto it = lookup_.find(id);
    return it == lookup_.end() ? Category::ignore : it->second;
  }

  const std::vector<Entry>& entries() const { return entries_; }

  /// Default schema over the Cityscapes train IDs. Vehicles, people, and
  /// built structures count as vertical; sidewalk and terrain as flat.
  static LabelSchema cityscapes_trainids() {
    return LabelSchema{{
        {0, "road", Category::road},
        {1, "sidewalk", Category::flat},
        {2, "building", Category::vertical},
        {3, "wall", Category::vertical},
        {4, "fence", Category::vertical},
        {5, "pole", Category::vertical},
        {6, "traffic light", Category::vertical},
        {7, "traffic sign", Category::vertical},
        {8, "vegetation", Category::vertical},
        {9, "terrain", Category::flat},
        {10, "sky", Category::sky},
        {11, "person", Category::vertical},
        {12, "rider", Category::vertical},
        {13, "car", Category::vertical},
        {14, "truck", Category::vertical},
        {15, "bus", Category::vertical},
        {16, "train", Category::vertical},
        {17, "motorcycle", Category::vertical},
        {18, "bicycle", Category::vertical},
        {255, "unlabeled", Category::ignore},
    }};
  }

 private:
  std::vector<Entry> entries_;
  std::map<int, Category> lookup_;
};

/// Per-pixel categories for a label map. IDs missing from the schema become
/// ignore; their count is reported through `unknown_count` when non-null.
inline Raster<Category> categorize(const LabelMap& mask, const LabelSchema& schema,
                                   std::size_t* unknown_count = nullptr) {
  Raster<Category> out(mask.width(), mask.height(), Category::ignore);
  std::size_t unknown = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int id = mask[i];
    if (!schema.contains(id)) {
      ++unknown;
      out[i] = Category::ignore;
    } else {
      out[i] = schema.category(id);
    }
  }
  if (unknown_count) *unknown_count = unknown;
  return out;
}

/// Intensity image with values clamped to [0, 1]; 1 or 3 channels.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  ImageBuffer(int width, int height, int channels)
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) throw InvalidInput("image: dimensions must be >= 1");
    if (channels != 1 && channels != 3) throw InvalidInput("image: channels must be 1 or 3");
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  void set(int x, int y, int c, double v) {
    if (!std::isfinite(v)) throw InvalidInput("image: non-finite intensity");
    data_[index(x, y, c)] = static_cast<float>(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
  }

  bool same_shape(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel 2D motion vectors (pixels) with validity.
class FlowField {
 public:
  FlowField() = default;

  FlowField(int width, int height)
      : u_(width, height, 0.0f), v_(width, height, 0.0f), valid_(width, height, std::uint8_t{0}) {}

  int width() const { return u_.width(); }
  int height() const { return u_.height(); }
  bool empty() const { return u_.empty(); }

  bool valid(int x, int y) const { return valid_.at(x, y) != 0; }
  float u(int x, int y) const { return u_.at(x, y); }
  float v(int x, int y) const { return v_.at(x, y); }

  void set(int x, int y, double du, double dv) {
    if (!std::isfinite(du) || !std::isfinite(dv))
      throw InvalidInput("flow field: non-finite vector");
    u_.at(x, y) = static_cast<float>(du);
    v_.at(x, y) = static_cast<float>(dv);
    valid_.at(x, y) = 1;
  }

  void invalidate(int x, int y) {
    u_.at(x, y) = 0.0f;
    v_.at(x, y) = 0.0f;
    valid_.at(x, y) = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::uint8_t f : valid_) n += f != 0;
    return n;
  }

  bool operator==(const FlowField&) const = default;

 private:
  Raster<float> u_;
  Raster<float> v_;
  Raster<std::uint8_t> valid_;
};

}  // namespace physdepth
