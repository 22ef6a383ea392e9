#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bubbles/builtin_kernels.hpp"
#include "bubbles/classify.hpp"
#include "bubbles/ctdiscretize.hpp"
#include "bubbles/iid.hpp"
#include "bubbles/io.hpp"
#include "bubbles/montecarlo.hpp"
#include "bubbles/quadrature.hpp"
#include "bubbles/volterra.hpp"

namespace bubbles {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double normal(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// ==========================================================================
// Criteria
// ==========================================================================

Outcome absorbing_doubling_mass_loss() {
  const auto start = Clock::now();
  const AbsorbingDoublingKernel k(0.5);
  const KernelPathModel model(k);
  SimulationOptions opt;
  opt.stop_after_drawdowns = 1;
  opt.threads = threads();
  const auto batch = simulate(model, 1.0, 60, 100000, 20240601, opt);
  const auto e = estimate_mass_loss(batch, drawdowns(batch, 1), 1);
  const double t = seconds_since(start);
  const bool ok = std::abs(e.estimate - 0.5) <= 4.0 * e.std_error && t < 10.0;
  return {ok, fmt("estimate %.6f std_error %.3g runtime %.2fs", e.estimate, e.std_error, t)};
}

Outcome increment_classifier() {
  const auto start = Clock::now();
  const auto harmonic = iid_bubble_check(harmonic_binomial_model(), 1000);
  const auto binomial = iid_bubble_check(iid_binomial_model(1.5, 0.5, 0.5), 1000);
  const auto geometric = iid_bubble_check(geometric_down_model(0.5, 0.5), 1000);
  const double t = seconds_since(start);
  const bool ok = harmonic.verdict == Verdict::Bubble && binomial.verdict == Verdict::NoBubble &&
                  geometric.verdict == Verdict::NoBubble && geometric.criterion == "kakutani" && t < 1.0;
  return {ok, fmt("harmonic %s, binomial %s, geometric %s (%s), runtime %.3fs", to_string(harmonic.verdict),
                  to_string(binomial.verdict), to_string(geometric.verdict), geometric.criterion.c_str(), t)};
}

Outcome harmonic_monotone_run() {
  const auto m = harmonic_binomial_model();
  const IIDPathModel model(m);
  SimulationOptions opt;
  opt.stop_after_drawdowns = 1;
  opt.threads = threads();
  const std::size_t n = 1000;
  const auto batch = simulate(model, 1.0, n, 100000, 20240602, opt);
  const auto rec = drawdowns(batch, 1, 1.0, 0);
  const std::vector<std::size_t> horizons{10, 30, 100, 300, 1000};
  const auto ladder = monotone_run_ladder(batch, rec, horizons);
  bool ok = true;
  std::string rungs;
  for (const auto& e : ladder) {
    // prod_{k=2}^{h} (1 - k^-2) by partial products.
    double oracle = 1.0;
    for (std::size_t k = 2; k <= e.horizon; ++k) oracle *= 1.0 - 1.0 / (static_cast<double>(k) * k);
    ok = ok && std::abs(e.estimate - oracle) <= 4.0 * e.std_error;
    rungs += fmt(" n=%zu:%.4f(%.4f)", e.horizon, e.estimate, oracle);
  }
  const auto& last = ladder.back();
  ok = ok && std::abs(last.estimate - 0.5) <= 4.0 * last.std_error;
  return {ok, fmt("limit 1/2, final %.4f +- %.4f;", last.estimate, last.std_error) + rungs};
}

double exponential_ratio_default(double x) { return x * (1.0 - std::exp(-x)); }

Outcome volterra_solver() {
  const auto start = Clock::now();
  const ExponentialRatioKernel k;
  const auto grid = log_grid(1e-2, 50.0, 400);
  SolveReport rp, rc;
  const auto mp = picard_from_identity(k, grid, {}, rp);
  const auto mc = contraction_solve(k, grid, grid_contraction_constants(k, grid), {}, rc);
  double err_p = 0.0, err_c = 0.0, dist = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    err_p = std::max(err_p, std::abs(mp.values[j] - exponential_ratio_default(grid[j])) / grid[j]);
    err_c = std::max(err_c, std::abs(mc.values[j] - exponential_ratio_default(grid[j])) / grid[j]);
    dist = std::max(dist, grid[j] - mp.values[j]);
  }
  const double t = seconds_since(start);
  const bool ok = rp.converged && rc.converged && rp.sup_residual <= 1e-8 && rc.sup_residual <= 1e-8 &&
                  err_p <= 1e-4 && err_c <= 1e-4 && std::abs(dist - std::exp(-1.0)) <= 1e-3 && t < 5.0;
  return {ok, fmt("residual %.2g/%.2g error %.2g/%.2g (picard/contraction) distance to id %.6f runtime %.2fs",
                  rp.sup_residual, rc.sup_residual, err_p, err_c, dist, t)};
}

Outcome call_subsolution() {
  const AffineDropKernel k;
  auto call = [](double x) { return std::max(x - 3.0, 0.0); };
  const std::vector<double> kink{3.0};
  const auto rep = certify_subsolution(call, k, log_grid(1e-2, 100.0, 400), kink, 0.0);
  const std::vector<double> six{6.0};
  const double margin = certify_subsolution(call, k, six, kink).margins[0];
  const bool ok = rep.certified && rep.min_margin >= -kQuadTol && std::abs(margin - 3.0 / 7.0) <= 1e-9;
  return {ok, fmt("min margin %.3g at x=%.3g, margin at 6 = %.12f (3/7 = %.12f)", rep.min_margin, rep.argmin_x,
                  margin, 3.0 / 7.0)};
}

Outcome operator_monotonicity() {
  const ExponentialRatioKernel er;
  const AffineDropKernel ad;
  const UniformDoublingKernel ud;
  const std::vector<const MarkovKernel*> kernels{&er, &ad, &ud};
  const auto xs = log_grid(1e-2, 50.0, 200);
  std::mt19937_64 gen(20240606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (const MarkovKernel* k : kernels) {
    const DiscreteOperator op(*k, xs);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> lo(xs.size()), hi(xs.size());
      for (std::size_t j = 0; j < xs.size(); ++j) {
        const double a = u(gen), b = u(gen);
        lo[j] = std::min(a, b);
        hi[j] = std::max(a, b);
      }
      for (TailMode mode : {TailMode::RatioConstant, TailMode::GapConstant}) {
        const auto ilo = op.apply_ratio(lo, mode);
        const auto ihi = op.apply_ratio(hi, mode);
        for (std::size_t j = 0; j < xs.size(); ++j) worst = std::max(worst, (ilo[j] - ihi[j]) * xs[j]);
      }
    }
  }
  return {worst <= 1e-9, fmt("largest order violation %.3g over 3 kernels x 100 pairs x 2 tail modes", worst)};
}

Outcome monte_carlo_vs_volterra() {
  const ExponentialRatioKernel k;
  const auto grid = log_grid(1e-2, 50.0, 400);
  SolveReport r;
  const auto m = picard_from_identity(k, grid, {}, r);
  const KernelPathModel model(k);
  SimulationOptions opt;
  opt.stop_after_drawdowns = 1;
  opt.threads = threads();
  bool ok = r.converged;
  std::string detail;
  std::uint64_t seed = 20240607;
  for (double x0 : {0.5, 1.0, 2.0}) {
    const auto batch = simulate(model, x0, 60, 100000, seed++, opt);
    const auto e = estimate_mass_loss(batch, drawdowns(batch, 1), 1);
    const double solved = m(x0);
    ok = ok && std::abs(e.estimate - solved) <= 4.0 * e.std_error + 1e-3;
    detail += fmt(" x0=%.1f: MC %.4f +- %.4f, M_S %.4f;", x0, e.estimate, e.std_error, solved);
  }
  return {ok, detail};
}

Outcome inverse_bessel_kernel() {
  const std::vector<double> g{0.5, 1.0, 2.0};
  double worst_mass = 0.0, worst_mean = 0.0;
  for (double x : g)
    for (double a : g)
      for (double b : g) {
        const InverseBesselKernel k(a, b);
        const auto c = check_kernel(k, x);
        worst_mass = std::max(worst_mass, std::abs(c.mass - 1.0));
        worst_mean = std::max(worst_mean, std::abs(c.mean - x));
      }
  const double atom = bessel_atom_weight(1.0, 1.0, 1.0);
  const std::size_t n = 100000;
  const InverseBesselKernel k(1.0, 1.0);
  const KernelPathModel model(k);
  SimulationOptions opt;
  opt.threads = threads();
  const auto chain = simulate(model, 1.0, 1, n, 20240608, opt);
  DiscretizeOptions dopt;
  dopt.simulation.threads = threads();
  const auto sde =
      discretize_sde_path(InverseBesselDriver(), DiscretizationSchedule::relative(1.0, 1.0), 1.0, 1, n, 20240609, dopt);
  std::vector<double> a, b;
  for (std::size_t p = 0; p < n; ++p) {
    a.push_back(chain.value(p, 1));
    b.push_back(sde.batch.value(p, 1));
  }
  const double ks = ks_distance(a, b);
  const bool ok = worst_mass <= 1e-8 && worst_mean <= 1e-8 && std::abs(atom - normal(-0.5)) <= 1e-10 && ks <= 0.01;
  return {ok, fmt("mass err %.2g mean err %.2g atom err %.2g KS %.4f", worst_mass, worst_mean,
                  std::abs(atom - normal(-0.5)), ks)};
}

// Time cap 1/4 keeps 4 P[up] < 1 for GBM, so the stopped values have finite variance.
Outcome discretized_bubble() {
  const auto start = Clock::now();
  const double alpha = 0.25, beta = 1.0;
  const auto bessel = bessel_bubble_report(1.0, alpha, beta, 100, 100000, 20240610, threads());
  DiscretizeOptions opt;
  opt.simulation.stop_after_drawdowns = 1;
  opt.simulation.threads = threads();
  const auto gbm =
      discretize_sde_path(GeometricBrownianDriver(), DiscretizationSchedule::relative(alpha, beta), 1.0, 60, 100000,
                          20240611, opt);
  const auto g = estimate_mass_loss(gbm.batch, drawdowns(gbm.batch, 1), 1);
  const auto& e = bessel.mass_loss;
  const double t = seconds_since(start);
  const bool ok = e.estimate > 4.0 * e.std_error && std::abs(g.estimate) <= 4.0 * g.std_error && t < 60.0;
  return {ok, fmt("inverse Bessel %.4f +- %.4f, GBM %.4f +- %.4f, runtime %.2fs", e.estimate, e.std_error,
                  g.estimate, g.std_error, t)};
}

Outcome appendix() {
  const auto p = appendix_partial_products(2000);
  bool decreasing = true;
  for (std::size_t i = 1; i < p.size(); ++i) decreasing = decreasing && p[i] <= p[i - 1];
  const double change = p[p.size() - 2] - p.back();
  bool golden_ok = true;
  std::string golden_note = "no golden file";
  const auto golden = std::filesystem::path(BUBBLES_TEST_DATA_DIR) / "golden" / "appendix_product.json";
  if (std::filesystem::exists(golden)) {
    const double want = read_json(golden).at("product_2000").get<double>();
    golden_ok = std::abs(p.back() - want) <= 1e-14 * want;
    golden_note = "golden " + format_double(want);
  }
  const bool ok = decreasing && p.back() > 0.0 && change < 1e-12 && golden_ok;
  return {ok, fmt("product %s, last change %.3g, %s", format_double(p.back()).c_str(), change, golden_note.c_str())};
}

}  // namespace
}  // namespace bubbles

int main() {
  using namespace bubbles;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"absorbing doubling mass loss 1/2", absorbing_doubling_mass_loss},
      {"increment classifier verdicts", increment_classifier},
      {"harmonic monotone-run limit 1/2", harmonic_monotone_run},
      {"Volterra solver on the exponential-ratio kernel", volterra_solver},
      {"call subsolution certificate", call_subsolution},
      {"operator monotonicity", operator_monotonicity},
      {"Monte Carlo vs Volterra default function", monte_carlo_vs_volterra},
      {"inverse Bessel kernel validity", inverse_bessel_kernel},
      {"discretized inverse Bessel bubble vs GBM", discretized_bubble},
      {"appendix product", appendix},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu %s: %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
