#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bubbles/error.hpp"

namespace bubbles {

/// Truncation tolerance shared by every kernel integral.
inline constexpr double kQuadTol = 1e-10;

struct QuadratureOptions {
  double rel_tol = kQuadTol;
  double abs_tol = 1e-15;
  unsigned max_depth = 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

template <class F>
QuadratureResult gk_panel(F&& f, double a, double b, const QuadratureOptions& opt) {
  if (!(b > a)) return {};
  using gk = boost::math::quadrature::gauss_kronrod<double, 21>;
  double error = 0.0;
  double l1 = 0.0;
  // A single panel within abs_tol needs no refinement.
  const double coarse = gk::integrate(f, a, b, 0, opt.rel_tol, &error, &l1);
  if (std::isfinite(coarse) && error <= opt.abs_tol) return {coarse, error};
  const double value = gk::integrate(f, a, b, opt.max_depth, opt.rel_tol, &error, &l1);
  // Boost stops at max_depth without complaint; enforce the tolerance here.
  const double allowed = std::max(opt.abs_tol, 10.0 * opt.rel_tol * l1);
  if (!std::isfinite(value) || error > allowed)
    throw QuadratureError("adaptive Gauss-Kronrod did not converge on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]",
                          error);
  return {value, error};
}

}  // namespace detail

/// Integral of f over [a, b] on Gauss-Kronrod 21-point panels, split at the
/// interior breakpoints (jumps or kinks of f).
template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::span<const double> breaks = {},
                           const QuadratureOptions& opt = {}) {
  QuadratureResult total;
  if (!(b > a)) return total;
  std::vector<double> cuts{a};
  for (double c : breaks)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto part = detail::gk_panel(f, cuts[i], cuts[i + 1], opt);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

/// Integral of f(y) dy over [lo, hi] with 0 < lo, computed in u = log y
/// (the substitution that keeps semi-infinite kernel tails well scaled).
template <class F>
QuadratureResult integrate_log(F&& f, double lo, double hi, std::span<const double> breaks = {},
                               const QuadratureOptions& opt = {}) {
  if (!(hi > lo)) return {};
  if (!(lo > 0.0)) fail(ErrorKind::Internal, "integrate_log: lower limit must be positive");
  std::vector<double> log_breaks;
  log_breaks.reserve(breaks.size());
  for (double c : breaks)
    if (c > 0.0) log_breaks.push_back(std::log(c));
  auto g = [&f](double u) {
    const double y = std::exp(u);
    return f(y) * y;
  };
  return integrate(g, std::log(lo), std::log(hi), log_breaks, opt);
}

}  // namespace bubbles
