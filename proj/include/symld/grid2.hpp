#pragma once

#include <cstddef>
#include <vector>

namespace symld {

// Minimal dense row-major matrix. All solvers here are desk scale, so this
// deliberately stays a plain container.
template <class T>
struct Grid2 {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Grid2() = default;
  Grid2(int r, int c, T fill = T{}) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }

  friend bool operator==(const Grid2& a, const Grid2& b) {
    return a.rows == b.rows && a.cols == b.cols && a.v == b.v;
  }
  friend auto operator<=>(const Grid2& a, const Grid2& b) = default;
};

}  // namespace symld
