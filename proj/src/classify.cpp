#include "bubbles/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bubbles/error.hpp"
#include "bubbles/quadrature.hpp"

namespace bubbles {

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Bubble: return "Bubble";
    case Verdict::NoBubble: return "NoBubble";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "Bubble") return Verdict::Bubble;
  if (s == "NoBubble") return Verdict::NoBubble;
  if (s == "Indeterminate") return Verdict::Indeterminate;
  fail(ErrorKind::Config, "unknown verdict '" + s + "'");
}

Json to_json(const BubbleVerdict& v) {
  Json j;
  j["verdict"] = to_string(v.verdict);
  j["criterion"] = v.criterion;
  Json ev = Json::object();
  for (const auto& [k, val] : v.evidence) ev[k] = std::isfinite(val) ? Json(val) : Json(format_double(val));
  j["evidence"] = ev;
  j["notes"] = v.notes;
  return j;
}

BubbleVerdict verdict_from_json(const Json& j) {
  BubbleVerdict v;
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  v.criterion = j.at("criterion").get<std::string>();
  for (const auto& [k, val] : j.at("evidence").items()) {
    if (val.is_string())
      v.evidence[k] = parse_double(val.get<std::string>());
    else
      v.evidence[k] = val.get<double>();
  }
  v.notes = j.at("notes").get<std::vector<std::string>>();
  return v;
}

namespace {

constexpr double kSlack = 10.0 * kQuadTol;

struct TailProfile {
  std::vector<double> x;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> b_eps;
};

TailProfile profile(const MarkovKernel& kernel, const std::vector<double>& nodes, double epsilon) {
  TailProfile p;
  p.x = nodes;
  for (double x : nodes) {
    p.a.push_back(probability_down(kernel, x));
    p.b.push_back(relative_recovery(kernel, x, 0.0));
    p.b_eps.push_back(relative_recovery(kernel, x, epsilon));
  }
  return p;
}

// Largest increase of v along the grid from index `from` on.
double max_increase(const std::vector<double>& x, const std::vector<double>& v, double x_from) {
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (x[i - 1] >= x_from) worst = std::max(worst, v[i] - v[i - 1]);
  return worst;
}

// Least-squares slope of log v against log x; diagnostic only.
double fitted_power_rate(const std::vector<double>& x, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(v[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(v[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

BubbleVerdict classify_markov_bubble(const MarkovKernel& kernel, const ClassifyOptions& options) {
  if (!(options.epsilon > 0.0)) fail(ErrorKind::Config, "classify: epsilon must be positive");
  if (!(options.x_a > 0.0) || options.x_a > options.tail.x_start)
    fail(ErrorKind::Config, "classify: x_a must lie in (0, tail start]");
  const auto nodes = options.tail.nodes();
  const TailProfile tail = profile(kernel, nodes, options.epsilon);

  BubbleVerdict out;
  auto& ev = out.evidence;

  std::vector<TailBound> bounds = options.certificates;
  if (options.use_analytic_bounds) {
    for (double e : {0.0, options.epsilon})
      for (auto& b : kernel.analytic_bounds(e, options.tail.x_start)) bounds.push_back(b);
  }

  // Every bound is checked against the recovery it claims to control.
  for (const TailBound& bound : bounds) {
    if (!(bound.epsilon >= 0.0)) fail(ErrorKind::Config, "classify: certificate epsilon must be nonnegative");
    const std::vector<double>* values = nullptr;
    std::vector<double> other;
    if (bound.epsilon == 0.0) {
      values = &tail.b;
    } else if (bound.epsilon == options.epsilon) {
      values = &tail.b_eps;
    } else {
      for (double x : nodes) other.push_back(relative_recovery(kernel, x, bound.epsilon));
      values = &other;
    }
    validate_tail_bound(bound, nodes, *values, kSlack,
                        bound.epsilon == 0.0 ? std::string("b") : "b_eps[" + format_double(bound.epsilon) + "]");
  }

  // Positivity of a from x_a on (grid check over [x_a, tail end]).
  auto a_nodes = log_grid(options.x_a, options.tail.x_end, 64);
  double min_a = *std::min_element(tail.a.begin(), tail.a.end());
  for (double x : a_nodes) min_a = std::min(min_a, probability_down(kernel, x));
  const double max_a = *std::max_element(tail.a.begin(), tail.a.end());
  ev["min_a"] = min_a;
  ev["max_a_tail"] = max_a;
  ev["b_tail_end"] = tail.b.back();
  ev["b_eps_tail_end"] = tail.b_eps.back();
  ev["epsilon"] = options.epsilon;
  const double up_mass = 1.0 - *std::max_element(tail.b_eps.begin(), tail.b_eps.end());
  ev["min_mean_above_cut"] = up_mass;
  ev["fitted_power_rate_b_eps"] = fitted_power_rate(tail.x, tail.b_eps);

  // No bubble: certified positive floor for b on the tail.
  for (const TailBound& bound : bounds) {
    if (bound.epsilon == 0.0 && bound.bounded_away_from_zero()) {
      out.verdict = Verdict::NoBubble;
      out.criterion = "recovery-floor";
      ev["b_floor"] = bound.coefficient;
      out.notes.push_back("b >= " + format_double(bound.coefficient) + " on [" + format_double(bound.x_from) +
                          ", inf) (" + bound.source + ")");
      return out;
    }
  }

  const bool assumption_a = min_a > 0.0;
  const bool unbounded = up_mass > 0.0;
  if (!assumption_a) out.notes.push_back("a vanishes somewhere on [x_a, tail end]");
  if (!unbounded) out.notes.push_back("no mass above x (1 + eps) on part of the tail");

  // Complete two-point family: iff test on b.
  bool two_point = true;
  for (double x : nodes)
    if (!kernel.two_point_form(x)) two_point = false;
  if (two_point) {
    const double min_a_tail = *std::min_element(tail.a.begin(), tail.a.end());
    const bool a_ok = min_a_tail > 0.0 && max_a < 1.0;
    // b < a puts the up atom above x, so the chain is unbounded.
    bool climbs = true;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!(tail.b[i] < tail.a[i])) climbs = false;
    for (const TailBound& bound : bounds) {
      if (bound.epsilon != 0.0) continue;
      const double increase = max_increase(tail.x, tail.b, bound.x_from);
      if (bound.side == BoundSide::Upper && a_ok && increase <= kSlack) {
        const double integral = bound.log_tail_integral();
        if (std::isfinite(integral) && climbs) {
          out.verdict = Verdict::Bubble;
          out.criterion = "complete-two-point";
          ev["tail_integral_bound"] = integral;
          ev["x_b"] = bound.x_from;
          out.notes.push_back("b nonincreasing on the tail grid; integral of b(e^u) <= " + format_double(integral) +
                              " (" + bound.source + ")");
          return out;
        }
      }
      if (bound.side == BoundSide::Lower && a_ok && !std::isfinite(bound.log_tail_integral())) {
        out.verdict = Verdict::NoBubble;
        out.criterion = "complete-two-point";
        ev["x_b"] = bound.x_from;
        out.notes.push_back("integral of b(e^u) diverges (" + bound.source + ")");
        return out;
      }
    }
  }

  // Sufficient condition through b_eps.
  for (const TailBound& bound : bounds) {
    if (bound.side != BoundSide::Upper || bound.epsilon <= 0.0) continue;
    const double integral = bound.log_tail_integral();
    if (!std::isfinite(integral)) continue;
    std::vector<double> values;
    if (bound.epsilon == options.epsilon) {
      values = tail.b_eps;
    } else {
      for (double x : nodes) values.push_back(relative_recovery(kernel, x, bound.epsilon));
    }
    const double increase = max_increase(tail.x, values, bound.x_from);
    ev["b_eps_max_increase"] = increase;
    if (increase > kSlack) {
      out.notes.push_back("b_eps not nonincreasing on the tail grid");
      continue;
    }
    if (!assumption_a || !unbounded) continue;
    out.verdict = Verdict::Bubble;
    out.criterion = "integrable-recovery";
    ev["tail_integral_bound"] = integral;
    ev["x_b"] = bound.x_from;
    out.notes.push_back("b_eps nonincreasing on the tail grid; integral of b_eps(e^u) <= " + format_double(integral) +
                        " (" + bound.source + ")");
    return out;
  }

  out.notes.push_back("no certified criterion applies");
  return out;
}

}  // namespace bubbles
