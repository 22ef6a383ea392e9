#include "bubbles/ctdiscretize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "bubbles/error.hpp"
#include "bubbles/parallel.hpp"
#include "bubbles/quadrature.hpp"
#include "bubbles/special.hpp"

namespace bubbles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Phi(-40) is below the smallest normal double.
constexpr double kCutoffSigmas = 40.0;
constexpr double kExplosionCap = 1e300;

void check_params(double x, double alpha, double beta) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorKind::Support, "inverse Bessel: state must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    fail(ErrorKind::Config, "inverse Bessel: alpha and beta must be positive");
}

struct BesselGeometry {
  double x, alpha, beta;
  double sqrt_alpha;
  double c;      // 2 beta / ((1 + beta) x)
  double top;    // (1 + beta) x
  double u_max;  // c / 2

  BesselGeometry(double x_, double alpha_, double beta_)
      : x(x_), alpha(alpha_), beta(beta_), sqrt_alpha(std::sqrt(alpha_)),
        c(2.0 * beta_ / ((1.0 + beta_) * x_)), top((1.0 + beta_) * x_), u_max(beta_ / ((1.0 + beta_) * x_)) {}

  double u(double z) const { return 1.0 / x - 1.0 / z; }
  double lower_cutoff() const { return 1.0 / (1.0 / x + kCutoffSigmas * sqrt_alpha); }

  // alpha * phi_alpha(v) = sqrt(alpha) * phi(v / sqrt(alpha)).
  double alpha_phi(double v) const { return sqrt_alpha * normal_pdf(v / sqrt_alpha); }

  // Density mass on (0, z] for 0 < z <= top.
  double mass_below(double z) const {
    const double v = u(z);
    const double s = sqrt_alpha;
    const double first = normal_cdf(v / s) / x + alpha_phi(v);
    const double second = (1.0 / x - c) * normal_cdf((v - c) / s) + alpha_phi(v - c);
    return std::max(0.0, x * (first - second));
  }

  // Integral of y times the density on (0, z].
  double mean_below(double z) const {
    const double v = u(z);
    return x * normal_interval((v - c) / sqrt_alpha, v / sqrt_alpha);
  }
};

}  // namespace

// ==========================================================================
// Closed forms
// ==========================================================================

double bessel_atom_weight(double x, double alpha, double beta) {
  check_params(x, alpha, beta);
  return 2.0 / (1.0 + beta) * normal_cdf(-beta / ((1.0 + beta) * x * std::sqrt(alpha)));
}

double bessel_cdf(double x, double alpha, double beta, double z) {
  check_params(x, alpha, beta);
  const BesselGeometry g(x, alpha, beta);
  if (!(z > 0.0)) return 0.0;
  if (z >= g.top) return 1.0;
  return std::min(1.0, g.mass_below(z));
}

double bessel_cdf_by_quadrature(double x, double alpha, double beta, double z) {
  check_params(x, alpha, beta);
  const BesselGeometry g(x, alpha, beta);
  if (!(z > 0.0)) return 0.0;
  if (z >= g.top) return 1.0;
  const InverseBesselKernel kernel(alpha, beta);
  // Mass below the cutoff is at most x (Phi(u / sqrt(alpha)) / x + alpha phi_alpha(u)) < 1e-300.
  const double lo = g.lower_cutoff();
  if (z <= lo) return 0.0;
  const auto r = integrate_log([&](double y) { return kernel.density(x, y); }, lo, z);
  return std::clamp(r.value, 0.0, 1.0);
}

// ==========================================================================
// InverseBesselKernel
// ==========================================================================

InverseBesselKernel::InverseBesselKernel(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  check_params(1.0, alpha, beta);
}

std::vector<Atom> InverseBesselKernel::atoms(double x) const {
  return {Atom{(1.0 + beta_) * x, bessel_atom_weight(x, alpha_, beta_)}};
}

double InverseBesselKernel::density(double x, double y) const {
  const BesselGeometry g(x, alpha_, beta_);
  if (!(y > 0.0) || y >= g.top) return 0.0;
  const double v = g.u(y);
  const double d1 = v * v / (2.0 * alpha_);
  // Second exponent minus the first: c (c - 2u) / (2 alpha) > 0.
  const double gap = g.c * (g.c - 2.0 * v) / (2.0 * alpha_);
  const double pre = x / (std::sqrt(2.0 * std::numbers::pi * alpha_) * y * y * y);
  return pre * std::exp(-d1) * -std::expm1(-gap);
}

Support InverseBesselKernel::support(double x) const {
  const BesselGeometry g(x, alpha_, beta_);
  return {g.lower_cutoff(), g.top};
}

double InverseBesselKernel::density_moment(double x, double lo, double hi, int power) const {
  const BesselGeometry g(x, alpha_, beta_);
  lo = std::max(lo, 0.0);
  hi = std::min(hi, g.top);
  if (!(hi > lo)) return 0.0;
  if (power == 0) return std::max(0.0, g.mass_below(hi) - (lo > 0.0 ? g.mass_below(lo) : 0.0));
  if (power == 1) return std::max(0.0, g.mean_below(hi) - (lo > 0.0 ? g.mean_below(lo) : 0.0));
  return MarkovKernel::density_moment(x, lo, hi, power);
}

namespace {

// Bisection in log z on the closed-form cdf until hi / lo - 1 < 1e-10.
double invert_bessel(const BesselGeometry& g, double target) {
  double lo = g.lower_cutoff();
  double hi = g.top;
  if (g.mass_below(lo) >= target) return lo;
  // mass_below(top) = 1 - w analytically; rounding may leave it a hair below target.
  if (g.mass_below(hi) < target - 1e-12)
    fail(ErrorKind::Internal, "inverse Bessel sampler: cdf does not bracket target " + std::to_string(target));
  while (hi / lo - 1.0 > 1e-10) {
    const double mid = std::sqrt(lo * hi);
    if (g.mass_below(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

double InverseBesselKernel::sample_density(double x, RandomStream& rng) const {
  const BesselGeometry g(x, alpha_, beta_);
  const double w = bessel_atom_weight(x, alpha_, beta_);
  return invert_bessel(g, rng.uniform() * (1.0 - w));
}

double sample_bessel_step(double x, double alpha, double beta, RandomStream& rng) {
  return bessel_step_from_uniform(x, alpha, beta, rng.uniform());
}

double bessel_step_from_uniform(double x, double alpha, double beta, double u) {
  const double w = bessel_atom_weight(x, alpha, beta);
  if (u < w) return (1.0 + beta) * x;
  return invert_bessel(BesselGeometry(x, alpha, beta), u - w);
}

// ==========================================================================
// Schedules
// ==========================================================================

DiscretizationSchedule DiscretizationSchedule::relative(double alpha, double beta) {
  DiscretizationSchedule s;
  s.variant = Variant::RelativeBarrier;
  s.alpha = alpha;
  s.beta = beta;
  s.validate();
  return s;
}

DiscretizationSchedule DiscretizationSchedule::deterministic(std::vector<double> a_seq, std::vector<double> b_seq,
                                                             double b0) {
  DiscretizationSchedule s;
  s.variant = Variant::DeterministicBarrier;
  s.a_seq = std::move(a_seq);
  s.b_seq = std::move(b_seq);
  s.b0 = b0;
  s.validate();
  return s;
}

double DiscretizationSchedule::a(std::size_t n) const {
  if (a_seq.empty()) return static_cast<double>(n);
  if (n < 1 || n > a_seq.size()) fail(ErrorKind::Config, "schedule: a_seq shorter than the horizon");
  return a_seq[n - 1];
}

double DiscretizationSchedule::b(std::size_t n) const {
  if (b_seq.empty()) return b0 * std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(n, 1000)));
  if (n < 1 || n > b_seq.size()) fail(ErrorKind::Config, "schedule: b_seq shorter than the horizon");
  return b_seq[n - 1];
}

void DiscretizationSchedule::validate() const {
  if (variant == Variant::RelativeBarrier) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
      fail(ErrorKind::Config, "schedule: alpha and beta must be positive and finite");
    return;
  }
  auto check = [](const std::vector<double>& seq, const char* what) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (!(seq[i] > 0.0) || !std::isfinite(seq[i]))
        fail(ErrorKind::Config, std::string("schedule: ") + what + " must be positive");
      if (i > 0 && !(seq[i] > seq[i - 1]))
        fail(ErrorKind::Config, std::string("schedule: ") + what + " must be strictly increasing");
    }
  };
  check(a_seq, "a_seq");
  check(b_seq, "b_seq");
  if (b_seq.empty() && (!(b0 > 0.0) || !std::isfinite(b0))) fail(ErrorKind::Config, "schedule: b0 must be positive");
}

// ==========================================================================
// Drivers
// ==========================================================================

namespace {

// P[min of a BES(3) bridge from r to r_next over time h <= rho], from the
// killed-at-zero Brownian density and reflection at rho.
double bessel_bridge_hit(double r, double r_next, double rho, double h) {
  const double e = 2.0 * (r - rho) * (r_next - rho) / h;
  if (e > 745.0) return 0.0;
  const double tail = 2.0 * r * r_next / h;
  return (std::exp(-e) - std::exp(-tail)) / -std::expm1(-tail);
}

}  // namespace

SegmentResult InverseBesselDriver::run(double x, double budget, double barrier, double dt, bool,
                                       RandomStream& rng) const {
  SegmentResult out{x, 0.0, false, false, false};
  if (!(x > 0.0)) return out;
  if (x >= barrier) {
    out.hit = true;
    return out;
  }
  // R = |B| for a three-dimensional Brownian motion B; X = 1 / R.
  double r = 1.0 / x;
  const double rho = std::isfinite(barrier) ? 1.0 / barrier : 0.0;
  double t = 0.0;
  while (t < budget) {
    // Radial steps are exact for any length; far from the barrier the step grows.
    const double gap = (r - rho) / 4.0;
    const double h = std::min(std::max(dt, gap * gap), budget - t);
    const double sh = std::sqrt(h);
    // |B + sqrt(h) Z|^2 = (R + sqrt(h) Z_1)^2 + h (Z_2^2 + Z_3^2), with Z_2^2 + Z_3^2 ~ 2 Exp(1).
    const double along = r + sh * rng.normal();
    const double r_next = std::sqrt(along * along + 2.0 * h * rng.exponential());
    t += h;
    const bool hit = r_next <= rho || (bridge_ && rho > 0.0 && rng.uniform() < bessel_bridge_hit(r, r_next, rho, h));
    if (hit) {
      out.x = barrier;
      out.elapsed = t;
      out.hit = true;
      return out;
    }
    r = r_next;
    if (r < 1.0 / kExplosionCap) {
      out.x = kExplosionCap;
      out.elapsed = t;
      out.exploded = true;
      return out;
    }
  }
  out.x = 1.0 / r;
  out.elapsed = budget;
  return out;
}

GeometricBrownianDriver::GeometricBrownianDriver(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorKind::Config, "geometric Brownian driver: sigma must be positive");
}

SegmentResult GeometricBrownianDriver::run(double x, double budget, double barrier, double dt, bool need_time,
                                           RandomStream& rng) const {
  SegmentResult out{x, 0.0, false, false, false};
  if (!(x > 0.0)) return out;
  if (x >= barrier) {
    out.hit = true;
    return out;
  }
  // log X is a Brownian motion with drift -sigma^2 / 2; its bridge maximum law is drift-free.
  const double step = need_time ? dt : budget;
  const double lb = std::isfinite(barrier) ? std::log(barrier) : kInf;
  double l = std::log(x);
  double t = 0.0;
  while (t < budget) {
    const double h = std::min(step, budget - t);
    const double var = sigma_ * sigma_ * h;
    const double l_next = l - 0.5 * var + std::sqrt(var) * rng.normal();
    t += h;
    bool hit = l_next >= lb;
    if (!hit && std::isfinite(lb)) hit = rng.uniform() < std::exp(-2.0 * (lb - l) * (lb - l_next) / var);
    if (hit) {
      out.x = barrier;
      out.elapsed = t;
      out.hit = true;
      return out;
    }
    l = l_next;
  }
  out.x = std::exp(l);
  if (!std::isfinite(out.x)) {
    out.x = kExplosionCap;
    out.exploded = true;
  }
  out.elapsed = budget;
  return out;
}

EulerDiffusionDriver::EulerDiffusionDriver(double scale, double power) : scale_(scale), power_(power) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(power))
    fail(ErrorKind::Config, "euler driver: scale must be positive and power finite");
}

SegmentResult EulerDiffusionDriver::run(double x, double budget, double barrier, double dt, bool,
                                        RandomStream& rng) const {
  SegmentResult out{x, 0.0, false, false, false};
  if (!(x > 0.0)) return out;
  if (x >= barrier) {
    out.hit = true;
    return out;
  }
  double t = 0.0;
  while (t < budget) {
    const double h = std::min(dt, budget - t);
    const double next = x + scale_ * std::pow(x, power_) * std::sqrt(h) * rng.normal();
    t += h;
    if (next >= barrier) {
      out.x = barrier;
      out.elapsed = t;
      out.hit = true;
      return out;
    }
    if (!(next > 0.0)) {
      // Zero is absorbing for a nonnegative local martingale.
      out.x = 0.0;
      out.elapsed = t;
      out.nonpositive = true;
      return out;
    }
    if (next > kExplosionCap) {
      out.x = kExplosionCap;
      out.elapsed = t;
      out.exploded = true;
      return out;
    }
    x = next;
  }
  out.x = x;
  out.elapsed = budget;
  return out;
}

// ==========================================================================
// Discretization
// ==========================================================================

DiscretizationResult discretize_sde_path(const Driver& driver, const DiscretizationSchedule& schedule, double x0,
                                         std::size_t steps, std::size_t paths, std::uint64_t seed,
                                         const DiscretizeOptions& options) {
  schedule.validate();
  if (steps < 1 || paths < 1) fail(ErrorKind::Config, "discretize: need n >= 1 and N >= 1");
  if (!(x0 > 0.0) || !std::isfinite(x0)) fail(ErrorKind::Config, "discretize: x0 must be positive");
  const bool relative = schedule.variant == DiscretizationSchedule::Variant::RelativeBarrier;
  const double dt = options.dt > 0.0 ? options.dt : 1e-4 * (relative ? schedule.alpha : 1.0);
  if (!relative) {
    schedule.a(steps);
    schedule.b(steps);
  }

  DiscretizationResult result;
  PathBatch& batch = result.batch;
  batch.x0 = x0;
  batch.horizon = steps;
  batch.master_seed = seed;
  batch.model_ref = driver.name();
  batch.paths.resize(paths);
  batch.hold.assign(paths, HoldReason::None);
  std::vector<unsigned char> exploded(paths, 0), nonpositive(paths, 0);

  parallel_for(paths, options.simulation.threads, [&](std::size_t p) {
    RandomStream rng(seed, p);
    auto& path = batch.paths[p];
    path.push_back(x0);
    double t = 0.0;
    std::size_t downs = 0;
    for (std::size_t n = 1; n <= steps; ++n) {
      const double x = path.back();
      double budget = 0.0;
      double barrier = 0.0;
      if (relative) {
        budget = schedule.alpha;
        barrier = (1.0 + schedule.beta) * x;
      } else {
        budget = std::max(0.0, schedule.a(n) - t);
        barrier = schedule.b(n);
      }
      const SegmentResult seg = driver.run(x, budget, barrier, dt, !relative, rng);
      t += seg.elapsed;
      exploded[p] |= seg.exploded;
      nonpositive[p] |= seg.nonpositive;
      path.push_back(seg.x);
      if (seg.x < x) ++downs;
      if (options.simulation.stop_after_drawdowns && downs >= *options.simulation.stop_after_drawdowns &&
          n < steps) {
        batch.hold[p] = HoldReason::Frozen;
        return;
      }
    }
  });
  for (std::size_t p = 0; p < paths; ++p) {
    result.exploded += exploded[p];
    result.nonpositive += nonpositive[p];
  }
  return result;
}

BesselBubbleReport bessel_bubble_report(double x0, double alpha, double beta, std::size_t n, std::size_t paths,
                                        std::uint64_t seed, unsigned threads) {
  const InverseBesselKernel kernel(alpha, beta);
  const KernelPathModel model(kernel);
  SimulationOptions sim;
  sim.stop_after_drawdowns = 1;
  sim.threads = threads;
  const PathBatch batch = simulate(model, x0, n, paths, seed, sim);
  BesselBubbleReport report;
  report.atom_weight = bessel_atom_weight(x0, alpha, beta);
  report.mass_loss = estimate_mass_loss(batch, drawdowns(batch, 1), 1);
  std::vector<std::size_t> horizons;
  for (std::size_t h : std::array<std::size_t, 10>{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000})
    if (h < n) horizons.push_back(h);
  horizons.push_back(n);
  report.run_ladder = monotone_run_ladder(batch, drawdowns(batch, 1, x0, 0), horizons);
  return report;
}

// ==========================================================================
// Kolmogorov-Smirnov
// ==========================================================================

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::Config, "ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
  if (n == 0 || m == 0 || !(level > 0.0 && level < 1.0)) fail(ErrorKind::Config, "ks_critical_value: bad arguments");
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace bubbles
