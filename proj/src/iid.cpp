#include "bubbles/iid.hpp"

#include <cmath>
#include <sstream>

#include "bubbles/error.hpp"
#include "bubbles/quadrature.hpp"
#include "bubbles/special.hpp"

namespace bubbles {

// ==========================================================================
// Factor laws
// ==========================================================================

double FactorLaw::mass() const {
  if (lognormal_sigma > 0.0) return 1.0;
  double m = 0.0;
  for (const Atom& at : atoms) m += at.weight;
  return m;
}

double FactorLaw::mean() const {
  if (lognormal_sigma > 0.0) return 1.0;
  double m = 0.0;
  for (const Atom& at : atoms) m += at.weight * at.location;
  return m;
}

double FactorLaw::prob_below_one() const {
  if (lognormal_sigma > 0.0) return normal_cdf(0.5 * lognormal_sigma);
  double m = 0.0;
  for (const Atom& at : atoms)
    if (at.location < 1.0) m += at.weight;
  return m;
}

double FactorLaw::recovery() const {
  if (lognormal_sigma > 0.0) return normal_cdf(-0.5 * lognormal_sigma);
  double m = 0.0;
  for (const Atom& at : atoms)
    if (at.location < 1.0) m += at.weight * at.location;
  return m;
}

double FactorLaw::sample(RandomStream& rng) const {
  if (lognormal_sigma > 0.0) {
    const double s = lognormal_sigma;
    return std::exp(s * rng.normal() - 0.5 * s * s);
  }
  const double u = rng.uniform();
  double acc = 0.0;
  for (const Atom& at : atoms) {
    acc += at.weight;
    if (u < acc) return at.location;
  }
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it)
    if (it->weight > 0.0) return it->location;
  fail(ErrorKind::DegenerateModel, "factor law has no mass");
}

// ==========================================================================
// Models
// ==========================================================================

IIDReturnModel::IIDReturnModel(std::string name, std::function<FactorLaw(std::size_t)> law, DeclaredTails tails)
    : name_(std::move(name)), law_(std::move(law)), tails_(std::move(tails)) {}

void IIDReturnModel::validate(std::size_t upto) const {
  constexpr double tol = 1e-12;
  for (std::size_t k = 1; k <= upto; ++k) {
    const FactorLaw law = law_(k);
    std::ostringstream where;
    where << name_ << ": step " << k;
    for (const Atom& at : law.atoms)
      if (!(at.location > 0.0) || !(at.weight >= 0.0))
        fail(ErrorKind::DegenerateModel, where.str() + ": factor atoms must be positive with nonnegative weight");
    if (std::abs(law.mass() - 1.0) > tol || std::abs(law.mean() - 1.0) > tol)
      fail(ErrorKind::DegenerateModel, where.str() + ": factor must have mass 1 and mean 1");
    const double a = law.prob_below_one();
    const double b = law.recovery();
    if (!(a < 1.0)) fail(ErrorKind::DegenerateModel, where.str() + ": a_k = 1 is outside the admissible class");
    if (b < 0.0 || b > a + tol) fail(ErrorKind::DegenerateModel, where.str() + ": need 0 <= b_k <= a_k");
  }
}

IIDReturnModel harmonic_binomial_model() {
  auto law = [](std::size_t k) {
    const double kk = static_cast<double>(k);
    return FactorLaw{{{1.0 / kk, 1.0 / kk}, {1.0 + 1.0 / kk, 1.0 - 1.0 / kk}}, 0.0};
  };
  DeclaredTails tails;
  tails.a_bound = SeriesBound{BoundSide::Lower, SeriesShape::Power, 1.0, 1.0, 2};
  tails.b_bound = SeriesBound{BoundSide::Upper, SeriesShape::Power, 1.0, 2.0, 2};
  return IIDReturnModel("harmonic-binomial", law, tails);
}

IIDReturnModel iid_binomial_model(double up, double down, double p) {
  if (!(up > 1.0 && down > 0.0 && down < 1.0 && p > 0.0 && p < 1.0))
    fail(ErrorKind::Config, "iid-binomial: need u > 1 > d > 0 and p in (0, 1)");
  if (std::abs(p * up + (1.0 - p) * down - 1.0) > 1e-12)
    fail(ErrorKind::Config, "iid-binomial: p u + (1 - p) d must equal 1");
  auto law = [=](std::size_t) { return FactorLaw{{{down, 1.0 - p}, {up, p}}, 0.0}; };
  DeclaredTails tails;
  tails.a_bound = SeriesBound{BoundSide::Lower, SeriesShape::Power, 1.0 - p, 0.0, 1};
  tails.b_bound = SeriesBound{BoundSide::Lower, SeriesShape::Power, (1.0 - p) * down, 0.0, 1};
  return IIDReturnModel("iid-binomial", law, tails);
}

IIDReturnModel iid_lognormal_model(double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::Config, "iid-lognormal: sigma must be positive");
  auto law = [=](std::size_t) { return FactorLaw{{}, sigma}; };
  DeclaredTails tails;
  tails.a_bound = SeriesBound{BoundSide::Lower, SeriesShape::Power, normal_cdf(0.5 * sigma), 0.0, 1};
  tails.b_bound = SeriesBound{BoundSide::Lower, SeriesShape::Power, normal_cdf(-0.5 * sigma), 0.0, 1};
  return IIDReturnModel("iid-lognormal", law, tails);
}

IIDReturnModel geometric_down_model(double down, double r) {
  if (!(down > 0.0 && down < 1.0 && r > 0.0 && r < 1.0))
    fail(ErrorKind::Config, "geometric-down: need d in (0, 1) and r in (0, 1)");
  auto law = [=](std::size_t k) {
    const double q = std::pow(r, static_cast<double>(k));
    return FactorLaw{{{down, q}, {(1.0 - down * q) / (1.0 - q), 1.0 - q}}, 0.0};
  };
  DeclaredTails tails;
  tails.a_bound = SeriesBound{BoundSide::Upper, SeriesShape::Geometric, 1.0, r, 1};
  tails.b_bound = SeriesBound{BoundSide::Upper, SeriesShape::Geometric, down, r, 1};
  return IIDReturnModel("geometric-down", law, tails);
}

// ==========================================================================
// Criterion
// ==========================================================================

namespace {

void check_series(const SeriesBound& bound, const IIDReturnModel& model, std::size_t partial_n, bool is_a) {
  constexpr double slack = 1e-12;
  const char* name = is_a ? "a" : "b";
  double sum = 0.0;
  double bound_sum = 0.0;
  for (std::size_t k = bound.from_k; k <= partial_n; ++k) {
    const double v = is_a ? model.a(k) : model.b(k);
    const double g = bound.term(k);
    sum += v;
    bound_sum += g;
    const bool bad = bound.side == BoundSide::Upper ? (v > g + slack || sum > bound_sum + slack * k)
                                                    : (v < g - slack || sum < bound_sum - slack * k);
    if (bad) {
      std::ostringstream msg;
      msg.precision(12);
      msg << model.name() << ": declared " << (bound.side == BoundSide::Upper ? "upper" : "lower") << " bound on "
          << name << "_k contradicted at k = " << k << " (" << name << "_k = " << v << ", bound " << g << ")";
      fail(ErrorKind::CertificateRejected, msg.str());
    }
  }
}

}  // namespace

BubbleVerdict iid_bubble_check(const IIDReturnModel& model, std::size_t partial_n) {
  if (partial_n < 1) fail(ErrorKind::Config, "iid check: partial_N must be at least 1");
  model.validate(partial_n);
  const auto& t = model.tails();
  if (!t.a_bound && !t.b_bound) fail(ErrorKind::Config, "iid check: declared tails are required");
  if (t.a_bound) check_series(*t.a_bound, model, partial_n, true);
  if (t.b_bound) check_series(*t.b_bound, model, partial_n, false);

  BubbleVerdict out;
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t k = 1; k <= partial_n; ++k) {
    sa += model.a(k);
    sb += model.b(k);
  }
  out.evidence["partial_sum_a"] = sa;
  out.evidence["partial_sum_b"] = sb;
  out.evidence["partial_n"] = static_cast<double>(partial_n);

  const bool a_diverges = t.a_bound && t.a_bound->side == BoundSide::Lower && t.a_bound->sum_diverges();
  const bool a_converges = t.a_bound && t.a_bound->side == BoundSide::Upper && !t.a_bound->sum_diverges();
  const bool b_diverges = t.b_bound && t.b_bound->side == BoundSide::Lower && t.b_bound->sum_diverges();
  const bool b_converges = t.b_bound && t.b_bound->side == BoundSide::Upper && !t.b_bound->sum_diverges();

  if (b_diverges) {
    out.verdict = Verdict::NoBubble;
    out.criterion = "increment-sums";
    out.notes.push_back("sum b_k diverges (declared lower bound)");
  } else if (a_converges) {
    out.verdict = Verdict::NoBubble;
    out.criterion = "kakutani";
    out.evidence["a_tail_bound"] = t.a_bound->tail_sum_bound(partial_n + 1);
    out.notes.push_back("sum a_k converges (declared upper bound); S is uniformly integrable");
  } else if (a_diverges && b_converges) {
    out.verdict = Verdict::Bubble;
    out.criterion = "increment-sums";
    out.evidence["b_tail_bound"] = t.b_bound->tail_sum_bound(partial_n + 1);
    out.notes.push_back("sum a_k diverges and sum b_k converges (declared bounds)");
  } else {
    out.notes.push_back("declared tails do not settle the series");
  }
  return out;
}

SurvivalProduct survival_product(const IIDReturnModel& model, std::size_t k_start, std::size_t n) {
  SurvivalProduct out;
  for (std::size_t l = std::max<std::size_t>(k_start, 1); l <= n; ++l) {
    const double b = model.b(l);
    if (!(b < 1.0)) fail(ErrorKind::DegenerateModel, model.name() + ": b_l = 1 at l = " + std::to_string(l));
    out.log_value += std::log1p(-b);
  }
  out.value = std::exp(out.log_value);
  out.limit_upper = out.value;
  const auto& bb = model.tails().b_bound;
  if (bb && bb->side == BoundSide::Upper && !bb->sum_diverges() && n + 1 >= bb->from_k) {
    // -log(1 - b) <= b / (1 - g_max); convergent bounds decrease, so g_max = g(N + 1).
    const double g_max = bb->term(n + 1);
    if (g_max < 1.0) out.limit_lower = std::exp(out.log_value - bb->tail_sum_bound(n + 1) / (1.0 - g_max));
  }
  return out;
}

std::vector<double> appendix_partial_products(std::size_t n, const std::function<double(std::size_t)>& factor) {
  std::vector<double> out;
  out.reserve(n);
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (factor) {
      log_sum += std::log(factor(k));
    } else {
      log_sum += log_normal_cdf(0.5 * std::sqrt(static_cast<double>(k)));
    }
    out.push_back(std::exp(log_sum));
  }
  return out;
}

double appendix_product(std::size_t n, const std::function<double(std::size_t)>& factor) {
  if (n < 1) fail(ErrorKind::Config, "appendix product: N must be at least 1");
  return appendix_partial_products(n, factor).back();
}

}  // namespace bubbles
