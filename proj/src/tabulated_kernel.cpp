#include "bubbles/tabulated_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "bubbles/error.hpp"

namespace bubbles {

namespace {

// Integral of y^power * k(y) over [lo, hi] for k linear between nodes.
double row_moment(const TabulatedKernel::Row& row, double lo, double hi, int power) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < row.y.size(); ++i) {
    const double y0 = row.y[i];
    const double y1 = row.y[i + 1];
    const double l = std::max(lo, y0);
    const double r = std::min(hi, y1);
    if (!(r > l)) continue;
    const double slope = (row.k[i + 1] - row.k[i]) / (y1 - y0);
    const double c0 = row.k[i] - slope * y0;  // k(y) = c0 + slope y
    if (power == 0)
      sum += c0 * (r - l) + 0.5 * slope * (r * r - l * l);
    else
      sum += 0.5 * c0 * (r * r - l * l) + slope * (r * r * r - l * l * l) / 3.0;
  }
  return sum;
}

double row_density(const TabulatedKernel::Row& row, double y) {
  if (y < row.y.front() || y > row.y.back()) return 0.0;
  const auto it = std::upper_bound(row.y.begin(), row.y.end(), y);
  if (it == row.y.end()) return row.k.back();
  const std::size_t i = static_cast<std::size_t>(it - row.y.begin()) - 1;
  const double t = (y - row.y[i]) / (row.y[i + 1] - row.y[i]);
  return row.k[i] + t * (row.k[i + 1] - row.k[i]);
}

}  // namespace

TabulatedKernel::TabulatedKernel(std::vector<Row> rows, double tolerance) : rows_(std::move(rows)) {
  if (rows_.empty()) fail(ErrorKind::Config, "user-defined kernel: table has no rows");
  std::sort(rows_.begin(), rows_.end(), [](const Row& l, const Row& r) { return l.x < r.x; });
  for (const Row& row : rows_) {
    std::ostringstream where;
    where << "user-defined kernel row x = " << row.x;
    if (!(row.x > 0.0)) fail(ErrorKind::Config, where.str() + ": state must be positive");
    if (row.y.size() < 2) fail(ErrorKind::Config, where.str() + ": need at least two y nodes");
    for (std::size_t i = 0; i < row.y.size(); ++i) {
      if (!(row.y[i] >= 0.0)) fail(ErrorKind::Config, where.str() + ": y must be nonnegative");
      if (i > 0 && !(row.y[i] > row.y[i - 1])) fail(ErrorKind::Config, where.str() + ": y must be increasing");
      if (!(row.k[i] >= 0.0) || !std::isfinite(row.k[i]))
        fail(ErrorKind::Config, where.str() + ": density must be finite and nonnegative");
    }
    const double mass = row_moment(row, row.y.front(), row.y.back(), 0);
    const double mean = row_moment(row, row.y.front(), row.y.back(), 1);
    if (std::abs(mass - 1.0) > tolerance || std::abs(mean - row.x) > tolerance * row.x) {
      std::ostringstream msg;
      msg.precision(12);
      msg << where.str() << ": not a martingale row (mass " << mass << ", mean " << mean << ")";
      fail(ErrorKind::Config, msg.str());
    }
  }
}

TabulatedKernel TabulatedKernel::from_table(const CsvTable& table, double tolerance) {
  const std::size_t cx = table.column("x");
  const std::size_t cy = table.column("y");
  const std::size_t ck = table.column("k");
  std::map<double, Row> by_state;
  for (const auto& r : table.rows) {
    Row& row = by_state[r[cx]];
    row.x = r[cx];
    row.y.push_back(r[cy]);
    row.k.push_back(r[ck]);
  }
  std::vector<Row> rows;
  for (auto& [x, row] : by_state) rows.push_back(std::move(row));
  return TabulatedKernel(std::move(rows), tolerance);
}

TabulatedKernel TabulatedKernel::from_csv(const std::filesystem::path& path, double tolerance) {
  return from_table(read_csv(path), tolerance);
}

std::vector<TabulatedKernel::Component> TabulatedKernel::components(double x) const {
  if (x <= rows_.front().x) return {{&rows_.front(), 1.0, x / rows_.front().x}};
  if (x >= rows_.back().x) return {{&rows_.back(), 1.0, x / rows_.back().x}};
  const auto it = std::upper_bound(rows_.begin(), rows_.end(), x, [](double v, const Row& r) { return v < r.x; });
  const Row& hi = *it;
  const Row& lo = *(it - 1);
  const double lambda = (x - lo.x) / (hi.x - lo.x);
  return {{&lo, 1.0 - lambda, 1.0}, {&hi, lambda, 1.0}};
}

double TabulatedKernel::density(double x, double y) const {
  double sum = 0.0;
  for (const auto& c : components(x)) sum += c.weight * row_density(*c.row, y / c.scale) / c.scale;
  return sum;
}

Support TabulatedKernel::support(double x) const {
  Support s{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& c : components(x)) {
    s.lo = std::min(s.lo, c.scale * c.row->y.front());
    s.hi = std::max(s.hi, c.scale * c.row->y.back());
  }
  return s;
}

std::vector<double> TabulatedKernel::breakpoints(double x) const {
  std::vector<double> out;
  for (const auto& c : components(x))
    for (double y : c.row->y) out.push_back(c.scale * y);
  std::sort(out.begin(), out.end());
  return out;
}

double TabulatedKernel::density_moment(double x, double lo, double hi, int power) const {
  double sum = 0.0;
  for (const auto& c : components(x)) {
    const double m = row_moment(*c.row, lo / c.scale, hi / c.scale, power);
    sum += c.weight * (power == 0 ? m : c.scale * m);
  }
  return sum;
}

}  // namespace bubbles
