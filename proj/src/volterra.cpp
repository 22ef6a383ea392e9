#include "bubbles/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bubbles/error.hpp"
#include "bubbles/parallel.hpp"
#include "bubbles/quadrature.hpp"

namespace bubbles {

const char* to_string(TailMode mode) noexcept {
  return mode == TailMode::RatioConstant ? "ratio-constant" : "gap-constant";
}

// ==========================================================================
// GridFunction
// ==========================================================================

GridFunction GridFunction::from(std::vector<double> grid, const std::function<double(double)>& f, TailMode mode) {
  GridFunction m;
  m.x = std::move(grid);
  m.values.reserve(m.x.size());
  for (double x : m.x) m.values.push_back(f(x));
  m.tail_mode = mode;
  return m;
}

double GridFunction::operator()(double y) const {
  const std::size_t m = x.size();
  if (y <= x.front()) return y * ratio(0);
  if (y >= x.back()) {
    if (tail_mode == TailMode::RatioConstant) return y * ratio(m - 1);
    return y - (x.back() - values.back());
  }
  const auto it = std::upper_bound(x.begin(), x.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double t = std::log(y / x[i]) / std::log(x[i + 1] / x[i]);
  return y * ((1.0 - t) * ratio(i) + t * ratio(i + 1));
}

void GridFunction::validate(double slack) const {
  if (x.size() != values.size() || x.size() < 2)
    fail(ErrorKind::Config, "grid function: need matching x and M columns");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0) || (j > 0 && !(x[j] > x[j - 1])))
      fail(ErrorKind::Config, "grid function: abscissae must be positive and strictly increasing");
    if (!std::isfinite(values[j]) || values[j] < -slack * x[j] || values[j] > x[j] * (1.0 + slack)) {
      std::ostringstream msg;
      msg << "grid function: M(" << x[j] << ") = " << values[j] << " outside [0, x]";
      fail(ErrorKind::Config, msg.str());
    }
  }
}

CsvTable to_csv(const GridFunction& m) {
  CsvTable t;
  t.header = {"x", "M", "ratio"};
  for (std::size_t j = 0; j < m.size(); ++j) t.rows.push_back({m.x[j], m.values[j], m.ratio(j)});
  return t;
}

GridFunction grid_function_from_csv(const CsvTable& table, TailMode mode) {
  GridFunction m;
  const std::size_t cx = table.column("x");
  const std::size_t cm = table.column("M");
  for (const auto& row : table.rows) {
    m.x.push_back(row[cx]);
    m.values.push_back(row[cm]);
  }
  m.tail_mode = mode;
  m.validate();
  return m;
}

// ==========================================================================
// Discrete operator
// ==========================================================================

DiscreteOperator::DiscreteOperator(const MarkovKernel& kernel, std::vector<double> grid,
                                   const OperatorOptions& options)
    : grid_(std::move(grid)) {
  const std::size_t m = grid_.size();
  if (m < 2) fail(ErrorKind::Config, "operator: grid needs at least two nodes");
  for (std::size_t j = 0; j < m; ++j)
    if (!(grid_[j] > 0.0) || (j > 0 && !(grid_[j] > grid_[j - 1])))
      fail(ErrorKind::Config, "operator: grid must be positive and strictly increasing");
  weights_.assign(m, {});
  tail_mass_.assign(m, 0.0);
  tail_mean_.assign(m, 0.0);
  const double xm = grid_.back();
  constexpr double inf = std::numeric_limits<double>::infinity();

  parallel_for(m, options.threads, [&](std::size_t j) {
    const double xj = grid_[j];
    auto& w = weights_[j];
    w.assign(m - j, 0.0);
    // Hat functions in u = log y: panel p carries nodes p and p + 1.
    auto add_point = [&](double y, double mass) {
      if (y > xm) {
        tail_mass_[j] += mass;
        tail_mean_[j] += mass * y;
        return;
      }
      if (y >= xm) {
        w[m - 1 - j] += mass * y;
        return;
      }
      const auto it = std::upper_bound(grid_.begin() + static_cast<std::ptrdiff_t>(j), grid_.end(), y);
      const std::size_t p = static_cast<std::size_t>(it - grid_.begin()) - 1;
      const double t = std::log(y / grid_[p]) / std::log(grid_[p + 1] / grid_[p]);
      w[p - j] += mass * y * (1.0 - t);
      w[p + 1 - j] += mass * y * t;
    };
    for (const Atom& at : kernel.atoms(xj))
      if (at.location >= xj && at.weight > 0.0) add_point(at.location, at.weight);

    const Support s = kernel.support(xj);
    if (!s.empty()) {
      const double lo = std::max(xj, s.lo);
      const double hi = s.hi;
      const auto breaks = kernel.breakpoints(xj);
      QuadratureOptions row_quad;
      row_quad.abs_tol = 1e-3 * kQuadTol * xj;
      for (std::size_t p = j; p + 1 < m && grid_[p] < hi; ++p) {
        const double l = std::max(lo, grid_[p]);
        const double r = std::min(hi, grid_[p + 1]);
        if (!(r > l)) continue;
        const double up = std::log(grid_[p]);
        const double h = std::log(grid_[p + 1]) - up;
        // exp(log(y)) can leave [l, r] by an ulp and fall off the support edge.
        auto right = [&](double y) {
          y = std::clamp(y, l, r);
          return y * kernel.density(xj, y) * (std::log(y) - up) / h;
        };
        const double total = kernel.density_moment(xj, l, r, 1);
        const double rv = integrate_log(right, l, r, breaks, row_quad).value;
        w[p - j] += std::max(0.0, total - rv);
        w[p + 1 - j] += std::max(0.0, rv);
      }
      if (hi > xm) {
        tail_mass_[j] += kernel.density_moment(xj, std::max(lo, xm), inf, 0);
        tail_mean_[j] += kernel.density_moment(xj, std::max(lo, xm), inf, 1);
      }
    }
    for (double& v : w) v /= xj;
  });

  for (std::size_t j = 0; j < m; ++j) {
    if (grid_[j] * options.tail_check_ratio > xm) break;
    const double excess = tail_mean_[j] / grid_[j];
    if (excess > options.tail_tolerance) {
      std::ostringstream msg;
      msg << kernel.name() << ": kernel mean beyond the grid end " << xm << " from x = " << grid_[j] << " is "
          << excess << " x, above the tail tolerance " << options.tail_tolerance << "; extend the grid";
      fail(ErrorKind::TailMass, msg.str());
    }
  }
}

double DiscreteOperator::row_sum(std::size_t j) const {
  double s = tail_mean_[j] / grid_[j];
  for (double v : weights_[j]) s += v;
  return s;
}

std::vector<double> DiscreteOperator::apply_ratio(std::span<const double> r, TailMode mode) const {
  const std::size_t m = grid_.size();
  if (r.size() != m) fail(ErrorKind::Internal, "operator: ratio vector size mismatch");
  const double xm = grid_.back();
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& w = weights_[j];
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * r[j + i];
    if (mode == TailMode::RatioConstant) {
      s += r[m - 1] * tail_mean_[j] / grid_[j];
    } else {
      s += (tail_mean_[j] - xm * tail_mass_[j] + xm * r[m - 1] * tail_mass_[j]) / grid_[j];
    }
    out[j] = std::clamp(s, 0.0, 1.0);
  }
  return out;
}

GridFunction apply_operator(const GridFunction& m, const MarkovKernel& kernel, const OperatorOptions& options) {
  m.validate();
  DiscreteOperator op(kernel, m.x, options);
  std::vector<double> r(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) r[j] = m.ratio(j);
  const auto out = op.apply_ratio(r, m.tail_mode);
  GridFunction res = m;
  for (std::size_t j = 0; j < m.size(); ++j) res.values[j] = out[j] * m.x[j];
  return res;
}

std::vector<double> apply_operator(const std::function<double(double)>& m, const MarkovKernel& kernel,
                                   std::span<const double> xs, std::span<const double> breaks) {
  std::vector<double> out;
  out.reserve(xs.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (double x : xs) {
    double s = 0.0;
    for (const Atom& at : kernel.atoms(x))
      if (at.location >= x) s += at.weight * m(at.location);
    const Support sp = kernel.support(x);
    if (!sp.empty()) {
      auto cuts = kernel.breakpoints(x);
      cuts.insert(cuts.end(), breaks.begin(), breaks.end());
      auto f = [&](double y) { return m(y) * kernel.density(x, y); };
      const double lo = std::max(x, sp.lo);
      if (sp.hi > lo) s += integrate_log(f, lo, std::min(sp.hi, inf), cuts).value;
    }
    out.push_back(s);
  }
  return out;
}

// ==========================================================================
// Solvers
// ==========================================================================

Json to_json(const SolveReport& r) {
  Json j;
  j["method"] = r.method;
  j["iterations"] = r.iterations;
  j["sup_residual"] = r.sup_residual;
  j["last_increment"] = r.last_increment;
  j["increment_ratio"] = r.increment_ratio;
  j["monotone_flag"] = r.monotone_flag;
  j["converged"] = r.converged;
  j["tol"] = r.tol;
  j["contraction_factor"] = r.contraction_factor;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  return j;
}

SolveReport solve_report_from_json(const Json& j) {
  SolveReport r;
  r.method = j.at("method").get<std::string>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.sup_residual = j.at("sup_residual").get<double>();
  r.last_increment = j.at("last_increment").get<double>();
  r.increment_ratio = j.at("increment_ratio").get<double>();
  r.monotone_flag = j.at("monotone_flag").get<bool>();
  r.converged = j.at("converged").get<bool>();
  r.tol = j.at("tol").get<double>();
  r.contraction_factor = j.at("contraction_factor").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.beta = j.at("beta").get<double>();
  return r;
}

namespace {

enum class Direction { Down, Up, Free };

// Shared fixed-point loop on ratio coefficients.
std::vector<double> iterate(const DiscreteOperator& op, std::vector<double> r, TailMode mode, Direction dir,
                            const SolveOptions& options, SolveReport& report) {
  const auto& x = op.grid();
  const std::size_t m = x.size();
  constexpr double kRoundoff = 1e-13;
  double prev_inc = 0.0;
  double prev_abs = 0.0;
  report.tol = options.tol;
  report.iterations = 0;
  report.converged = false;
  report.monotone_flag = true;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    auto next = op.apply_ratio(r, mode);
    double inc = 0.0;
    double abs_inc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = next[j] - r[j];
      if ((dir == Direction::Down && d > kRoundoff) || (dir == Direction::Up && d < -kRoundoff)) {
        report.monotone_flag = false;
        std::ostringstream msg;
        msg << "Picard iterate " << it << " moved " << (dir == Direction::Down ? "up" : "down") << " by " << d
            << " at x = " << x[j] << " (node " << j << ")";
        throw MonotonicityError(msg.str(), j, it);
      }
      inc = std::max(inc, std::abs(d));
      abs_inc = std::max(abs_inc, std::abs(d) * x[j]);
    }
    if (prev_abs > 1e-9 * x.back() && abs_inc > 0.0)
      report.contraction_factor = std::max(report.contraction_factor, abs_inc / prev_abs);
    report.increment_ratio = prev_inc > 0.0 ? inc / prev_inc : 0.0;
    prev_inc = inc;
    prev_abs = abs_inc;
    r = std::move(next);
    report.iterations = it;
    report.last_increment = inc;
    if (inc <= options.tol) {
      report.converged = true;
      break;
    }
  }
  const auto check = op.apply_ratio(r, mode);
  double res = 0.0;
  for (std::size_t j = 0; j < m; ++j) res = std::max(res, std::abs(check[j] - r[j]));
  report.sup_residual = res;
  return r;
}

GridFunction to_grid_function(const std::vector<double>& x, const std::vector<double>& r, TailMode mode) {
  GridFunction out;
  out.x = x;
  out.tail_mode = mode;
  out.values.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out.values[j] = r[j] * x[j];
  return out;
}

}  // namespace

GridFunction picard_from_identity(const MarkovKernel& kernel, std::vector<double> grid, const SolveOptions& options,
                                  SolveReport& report) {
  DiscreteOperator op(kernel, std::move(grid), options.op);
  report = {};
  report.method = "picard-from-identity";
  auto r = iterate(op, std::vector<double>(op.grid().size(), 1.0), TailMode::RatioConstant, Direction::Down, options,
                   report);
  return to_grid_function(op.grid(), r, TailMode::RatioConstant);
}

GridFunction picard_from(const MarkovKernel& kernel, const GridFunction& start, const SolveOptions& options,
                         SolveReport& report) {
  start.validate();
  DiscreteOperator op(kernel, start.x, options.op);
  std::vector<double> r(start.size());
  for (std::size_t j = 0; j < start.size(); ++j) r[j] = start.ratio(j);
  report = {};
  report.method = "picard";
  const auto first = op.apply_ratio(r, start.tail_mode);
  bool sub = true;
  bool super = true;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (first[j] < r[j] - 1e-13) sub = false;
    if (first[j] > r[j] + 1e-13) super = false;
  }
  const Direction dir = sub ? Direction::Up : (super ? Direction::Down : Direction::Free);
  r = iterate(op, std::move(r), start.tail_mode, dir, options, report);
  return to_grid_function(op.grid(), r, start.tail_mode);
}

ContractionCertificate grid_contraction_constants(const MarkovKernel& kernel, std::span<const double> grid) {
  ContractionCertificate c{1.0, 0.0};
  for (double x : grid) {
    c.alpha = std::min(c.alpha, probability_down(kernel, x));
    c.beta = std::max(c.beta, x * relative_recovery(kernel, x, 0.0));
  }
  return c;
}

GridFunction contraction_solve(const MarkovKernel& kernel, std::vector<double> grid,
                               const ContractionCertificate& certificate, const SolveOptions& options,
                               SolveReport& report) {
  if (!(certificate.alpha > 0.0 && certificate.alpha <= 1.0))
    fail(ErrorKind::HypothesisViolation, "contraction solve: alpha must lie in (0, 1]");
  if (!(certificate.beta >= 0.0) || !std::isfinite(certificate.beta))
    fail(ErrorKind::HypothesisViolation, "contraction solve: beta must be finite and nonnegative");
  const double slack = 10.0 * kQuadTol;
  for (double x : grid) {
    const double a = probability_down(kernel, x);
    const double xb = x * relative_recovery(kernel, x, 0.0);
    if (a < certificate.alpha - slack || xb > certificate.beta + slack * std::max(1.0, x)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "contraction solve: hypothesis fails at x = " << x << " (a = " << a << ", alpha = " << certificate.alpha
          << "; x b = " << xb << ", beta = " << certificate.beta << ")";
      fail(ErrorKind::HypothesisViolation, msg.str());
    }
  }
  DiscreteOperator op(kernel, std::move(grid), options.op);
  const double level = certificate.beta / certificate.alpha;
  std::vector<double> r;
  for (double x : op.grid()) r.push_back(std::max(0.0, 1.0 - level / x));
  report = {};
  report.method = "contraction";
  report.alpha = certificate.alpha;
  report.beta = certificate.beta;
  r = iterate(op, std::move(r), TailMode::GapConstant, Direction::Free, options, report);
  return to_grid_function(op.grid(), r, TailMode::GapConstant);
}

SubsolutionReport certify_subsolution(const GridFunction& m, const MarkovKernel& kernel, double slack,
                                      const OperatorOptions& options) {
  const GridFunction km = apply_operator(m, kernel, options);
  SubsolutionReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double margin = km.values[j] - m.values[j];
    rep.margins.push_back(margin);
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.argmin_x = m.x[j];
    }
  }
  rep.certified = rep.min_margin >= -slack;
  return rep;
}

SubsolutionReport certify_subsolution(const std::function<double(double)>& m, const MarkovKernel& kernel,
                                      std::span<const double> xs, std::span<const double> breaks, double slack) {
  const auto km = apply_operator(m, kernel, xs, breaks);
  SubsolutionReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double margin = km[j] - m(xs[j]);
    rep.margins.push_back(margin);
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.argmin_x = xs[j];
    }
  }
  rep.certified = rep.min_margin >= -slack;
  return rep;
}

std::vector<RatioPoint> default_ratio_profile(const GridFunction& m) {
  std::vector<RatioPoint> out(m.size());
  double sup = 0.0;
  for (std::size_t k = m.size(); k-- > 0;) {
    sup = std::max(sup, m.ratio(k));
    out[k] = {m.x[k], m.ratio(k), sup};
  }
  return out;
}

}  // namespace bubbles
