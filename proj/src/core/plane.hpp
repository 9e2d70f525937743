#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kswap {

// Row-major 2D grid of doubles; the working type for all per-slice math.
struct Plane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  std::size_t size() const { return values.size(); }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool same_shape(const Plane& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_string() const { return std::to_string(rows) + "x" + std::to_string(cols); }

  friend bool operator==(const Plane&, const Plane&) = default;
};

}  // namespace kswap
