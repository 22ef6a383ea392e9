#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bubbles/io.hpp"
#include "bubbles/kernel.hpp"

namespace bubbles {

/// Extrapolation of M beyond the last node x_m:
///   RatioConstant: M(y) = y M(x_m) / x_m
///   GapConstant:   M(y) = y - (x_m - M(x_m))
enum class TailMode { RatioConstant, GapConstant };

const char* to_string(TailMode mode) noexcept;

/// Nonnegative function on an increasing positive grid, interpolated linearly
/// in (log x, M/x). Below x_1 the ratio M/x is held at its first value.
struct GridFunction {
  std::vector<double> x;
  std::vector<double> values;
  TailMode tail_mode = TailMode::RatioConstant;

  static GridFunction from(std::vector<double> grid, const std::function<double(double)>& f,
                           TailMode mode = TailMode::RatioConstant);

  double operator()(double y) const;
  double ratio(std::size_t j) const { return values[j] / x[j]; }
  std::size_t size() const { return x.size(); }

  /// Throws Config unless 0 <= M(x_j) <= x_j (up to `slack` x_j) with finite values.
  void validate(double slack = 0.0) const;
};

CsvTable to_csv(const GridFunction& m);
GridFunction grid_function_from_csv(const CsvTable& table, TailMode mode = TailMode::RatioConstant);

struct OperatorOptions {
  /// Maximal kernel mean beyond x_m, relative to x_j, tolerated at nodes x_j <= x_m / tail_check_ratio.
  double tail_tolerance = 1e-3;
  double tail_check_ratio = 10.0;
  unsigned threads = 1;
};

/// Discretisation of K(M)(x) = int_[x, inf) M(y) K(x, dy) on the ratio
/// coefficients r_i = M(x_i) / x_i. Row j of the matrix holds the nonnegative
/// weights of r_j, ..., r_m, so the operator is monotone by construction.
class DiscreteOperator {
 public:
  DiscreteOperator(const MarkovKernel& kernel, std::vector<double> grid, const OperatorOptions& options = {});

  const std::vector<double>& grid() const { return grid_; }

  /// Ratios of K(M) at the nodes for ratio coefficients r, clamped to [0, 1].
  std::vector<double> apply_ratio(std::span<const double> r, TailMode mode) const;

  /// Row sum of the ratio weights: 1 - b(x_j) in ratio mode.
  double row_sum(std::size_t j) const;
  /// Kernel mass above x_m from node j.
  double tail_mass(std::size_t j) const { return tail_mass_[j]; }

 private:
  std::vector<double> grid_;
  std::vector<std::vector<double>> weights_;  // weights_[j][i - j]
  std::vector<double> tail_mass_;             // int_(x_m, inf) K(x_j, dy)
  std::vector<double> tail_mean_;             // int_(x_m, inf) y K(x_j, dy)
};

/// K(M) on M's own grid, using M's tail mode.
GridFunction apply_operator(const GridFunction& m, const MarkovKernel& kernel, const OperatorOptions& options = {});

/// K(M)(x_j) for an analytic M by direct quadrature; `breaks` lists kinks of M.
std::vector<double> apply_operator(const std::function<double(double)>& m, const MarkovKernel& kernel,
                                   std::span<const double> xs, std::span<const double> breaks = {});

struct SolveReport {
  std::string method;
  std::size_t iterations = 0;
  /// sup_j |K(M)(x_j) - M(x_j)| / x_j of the returned function.
  double sup_residual = 0.0;
  /// Last sup_j |M_{n+1}(x_j) - M_n(x_j)| / x_j.
  double last_increment = 0.0;
  /// Ratio of the last two increments (trend for slow cases).
  double increment_ratio = 0.0;
  bool monotone_flag = true;
  bool converged = false;
  double tol = 0.0;
  /// Largest observed ||M_{n+1} - M_n|| / ||M_n - M_{n-1}|| in the sup norm, over
  /// iterations whose increment exceeds 1e-9 x_m. On a grid of log spacing h the
  /// interpolated operator contracts by at most (1 - alpha) e^h.
  double contraction_factor = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

Json to_json(const SolveReport& r);
SolveReport solve_report_from_json(const Json& j);

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 10000;
  OperatorOptions op;
};

/// M_0 = id, M_{n+1} = K(M_n). Iterates must be pointwise nonincreasing; a rise
/// beyond rounding raises MonotonicityError carrying the node index.
GridFunction picard_from_identity(const MarkovKernel& kernel, std::vector<double> grid, const SolveOptions& options,
                                  SolveReport& report);

/// Picard iteration from a given start (nondecreasing when the start is a subsolution).
GridFunction picard_from(const MarkovKernel& kernel, const GridFunction& start, const SolveOptions& options,
                         SolveReport& report);

struct ContractionCertificate {
  double alpha = 0.0;  // inf_x a(x)
  double beta = 0.0;   // sup_x x b(x)
};

/// Banach iteration from (x - beta / alpha)^+ with the gap tail closure.
/// Throws HypothesisViolation when a(x_j) < alpha or x_j b(x_j) > beta on the grid.
GridFunction contraction_solve(const MarkovKernel& kernel, std::vector<double> grid,
                               const ContractionCertificate& certificate, const SolveOptions& options,
                               SolveReport& report);

/// Grid values of (min a, max x b); the certificate a user would have to assert.
ContractionCertificate grid_contraction_constants(const MarkovKernel& kernel, std::span<const double> grid);

struct SubsolutionReport {
  bool certified = false;
  double min_margin = 0.0;
  double argmin_x = 0.0;
  std::vector<double> margins;  // K(M)(x_j) - M(x_j)
};

/// Subsolution test M <= K(M) on the grid up to `slack`.
SubsolutionReport certify_subsolution(const GridFunction& m, const MarkovKernel& kernel, double slack = 1e-9,
                                      const OperatorOptions& options = {});
SubsolutionReport certify_subsolution(const std::function<double(double)>& m, const MarkovKernel& kernel,
                                      std::span<const double> xs, std::span<const double> breaks = {},
                                      double slack = 1e-9);

struct RatioPoint {
  double x = 0.0;
  double ratio = 0.0;
  /// sup of the ratio over nodes >= x.
  double tail_sup = 0.0;
};

std::vector<RatioPoint> default_ratio_profile(const GridFunction& m);

}  // namespace bubbles
