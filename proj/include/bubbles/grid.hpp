#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bubbles/error.hpp"

namespace bubbles {

/// `points` log-spaced abscissae from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    fail(ErrorKind::Config, "log_grid: need 0 < lo < hi and at least two points");
  std::vector<double> grid(points);
  const double a = std::log(lo);
  const double h = (std::log(hi) - a) / static_cast<double>(points - 1);
  for (std::size_t j = 0; j < points; ++j) grid[j] = std::exp(a + h * static_cast<double>(j));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

struct TailGrid {
  double x_start = 10.0;
  double x_end = 1e4;
  std::size_t points = 200;

  std::vector<double> nodes() const { return log_grid(x_start, x_end, points); }
};

}  // namespace bubbles
