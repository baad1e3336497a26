#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace scenecomp {

// Row-major 2D array. (x, y) = (column, row), origin top-left.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {
    if (w < 0 || h < 0) throw std::invalid_argument("Grid: negative dimensions");
  }

  T& operator()(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  const T& operator()(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  size_t size() const { return data.size(); }
  bool same_size(int w, int h) const { return width == w && height == h; }

  bool operator==(const Grid&) const = default;
};

using PixelMask = Grid<uint8_t>;

inline size_t count_set(const PixelMask& m) {
  size_t n = 0;
  for (uint8_t v : m.data) n += (v != 0);
  return n;
}

// Metric depth in meters; missing pixels hold a non-finite sentinel.
struct DepthImage {
  Grid<float> depth;

  DepthImage() = default;
  DepthImage(int w, int h) : depth(w, h, missing_value()) {}

  static constexpr float missing_value() { return std::numeric_limits<float>::quiet_NaN(); }
  static bool is_valid(float d) { return std::isfinite(d) && d > 0.f; }

  int width() const { return depth.width; }
  int height() const { return depth.height; }

  float at(int x, int y) const { return depth(x, y); }
  void set(int x, int y, float d) { depth(x, y) = d; }
  bool valid_at(int x, int y) const { return is_valid(depth(x, y)); }

  size_t valid_count() const {
    size_t n = 0;
    for (float d : depth.data) n += is_valid(d);
    return n;
  }
};

}  // namespace scenecomp
