#pragma once

#include <cstddef>
#include <vector>

#include "physdepth/errors.hpp"

namespace physdepth {

/// Dense row-major 2D grid of values.
template <typename T>
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, const T& fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw InvalidInput("raster: dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

  template <typename U>
  bool same_size(const Raster<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

}  // namespace physdepth
