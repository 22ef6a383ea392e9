#include "bubbles/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bubbles/error.hpp"
#include "bubbles/parallel.hpp"

namespace bubbles {

namespace {

constexpr std::size_t kUnknown = std::numeric_limits<std::size_t>::max();

}  // namespace

bool KernelPathModel::absorbing(double x, std::size_t) const {
  if (!kernel_.support(x).empty()) return false;
  const auto atoms = kernel_.atoms(x);
  return atoms.size() == 1 && atoms.front().location == x;
}

// ==========================================================================
// Simulation
// ==========================================================================

double PathBatch::value(std::size_t p, std::size_t step) const {
  const auto& path = paths[p];
  return step < path.size() ? path[step] : path.back();
}

std::size_t PathBatch::known_until(std::size_t p) const {
  return hold[p] == HoldReason::Frozen ? paths[p].size() - 1 : horizon;
}

PathBatch simulate(const PathModel& model, double x0, std::size_t n, std::size_t paths, std::uint64_t master_seed,
                   const SimulationOptions& options) {
  if (n < 1 || paths < 1) fail(ErrorKind::Config, "simulate: need n >= 1 and N >= 1");
  if (!(x0 > 0.0) || !std::isfinite(x0)) fail(ErrorKind::Config, "simulate: x0 must be positive");
  PathBatch batch;
  batch.x0 = x0;
  batch.horizon = n;
  batch.master_seed = master_seed;
  batch.model_ref = model.name();
  batch.paths.resize(paths);
  batch.hold.assign(paths, HoldReason::None);
  parallel_for(paths, options.threads, [&](std::size_t p) {
    RandomStream rng(master_seed, p);
    auto& path = batch.paths[p];
    path.reserve(options.stop_after_drawdowns ? 8 : n + 1);
    path.push_back(x0);
    std::size_t downs = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double x = path.back();
      if (model.absorbing(x, k)) {
        batch.hold[p] = HoldReason::Absorbed;
        return;
      }
      double y = 0.0;
      try {
        y = model.step(x, k, rng);
      } catch (const Error& e) {
        throw Error(e.kind(), "path " + std::to_string(p) + ", step " + std::to_string(k) + ": " + e.what());
      }
      path.push_back(y);
      if (y < x) ++downs;
      if (options.stop_after_drawdowns && downs >= *options.stop_after_drawdowns && k < n) {
        batch.hold[p] = HoldReason::Frozen;
        return;
      }
    }
  });
  return batch;
}

CsvTable to_csv(const PathBatch& batch) {
  CsvTable t;
  t.header = {"path", "step", "value", "hold"};
  for (std::size_t p = 0; p < batch.size(); ++p) {
    const double hold = static_cast<double>(static_cast<int>(batch.hold[p]));
    for (std::size_t s = 0; s < batch.paths[p].size(); ++s)
      t.rows.push_back({static_cast<double>(p), static_cast<double>(s), batch.paths[p][s], hold});
  }
  return t;
}

PathBatch path_batch_from_csv(const CsvTable& table, double x0, std::uint64_t master_seed, const std::string& model,
                              std::optional<std::size_t> horizon) {
  PathBatch b;
  b.x0 = x0;
  b.master_seed = master_seed;
  b.model_ref = model;
  const std::size_t cp = table.column("path");
  const std::size_t cs = table.column("step");
  const std::size_t cv = table.column("value");
  const std::size_t ch = table.column("hold");
  for (const auto& row : table.rows) {
    const auto p = static_cast<std::size_t>(row[cp]);
    const auto s = static_cast<std::size_t>(row[cs]);
    if (p >= b.paths.size()) {
      b.paths.resize(p + 1);
      b.hold.resize(p + 1, HoldReason::None);
    }
    if (s != b.paths[p].size()) fail(ErrorKind::Config, "path csv: steps must be consecutive from 0");
    b.paths[p].push_back(row[cv]);
    b.hold[p] = static_cast<HoldReason>(static_cast<int>(row[ch]));
    b.horizon = std::max(b.horizon, s);
  }
  if (horizon) {
    if (*horizon < b.horizon) fail(ErrorKind::Config, "path csv: stored steps exceed the horizon");
    b.horizon = *horizon;
  }
  return b;
}

// ==========================================================================
// Drawdowns
// ==========================================================================

std::vector<std::size_t> drawdown_indices(std::span<const double> path) {
  std::vector<std::size_t> out;
  for (std::size_t j = 1; j < path.size(); ++j)
    if (path[j] < path[j - 1]) out.push_back(j);
  return out;
}

DrawdownRecord drawdowns(const PathBatch& batch, std::size_t k_max, double threshold, std::size_t run_start) {
  if (k_max < 1) fail(ErrorKind::Config, "drawdowns: k_max must be at least 1");
  DrawdownRecord r;
  r.k_max = k_max;
  r.run_start = run_start;
  r.threshold = threshold;
  r.horizon = batch.horizon;
  const std::size_t N = batch.size();
  r.tau.resize(N);
  r.tau_tilde.assign(N, batch.horizon + 1);
  r.run_flag.assign(N, false);
  r.known_until.resize(N);
  for (std::size_t p = 0; p < N; ++p) {
    const auto& path = batch.paths[p];
    r.known_until[p] = batch.known_until(p);
    bool tilde_found = false;
    for (std::size_t j = 1; j < path.size(); ++j) {
      if (!(path[j] < path[j - 1])) continue;
      if (r.tau[p].size() < k_max) r.tau[p].push_back(j);
      if (!tilde_found && j > run_start) {
        r.tau_tilde[p] = j;
        tilde_found = true;
      }
    }
    if (!tilde_found && r.known_until[p] < batch.horizon) r.tau_tilde[p] = kUnknown;
    r.run_flag[p] = run_start <= r.known_until[p] && batch.value(p, run_start) >= threshold &&
                    r.tau_tilde[p] != kUnknown && r.tau_tilde[p] > batch.horizon;
  }
  return r;
}

// ==========================================================================
// Estimators
// ==========================================================================

Json to_json(const DrawdownEstimate& e) {
  Json j;
  j["estimand"] = e.estimand;
  j["value"] = e.estimate;
  j["std_error"] = e.std_error;
  j["n_effective"] = e.n_effective;
  j["n"] = e.horizon;
  j["N"] = e.paths;
  j["seed"] = e.seed;
  j["k"] = e.k;
  j["threshold"] = e.threshold;
  return j;
}

DrawdownEstimate drawdown_estimate_from_json(const Json& j) {
  DrawdownEstimate e;
  e.estimand = j.at("estimand").get<std::string>();
  e.estimate = j.at("value").get<double>();
  e.std_error = j.at("std_error").get<double>();
  e.n_effective = j.at("n_effective").get<std::size_t>();
  e.horizon = j.at("n").get<std::size_t>();
  e.paths = j.at("N").get<std::size_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.k = j.at("k").get<std::size_t>();
  e.threshold = j.at("threshold").get<double>();
  return e;
}

DrawdownEstimate mean_estimate(std::span<const double> values, const std::string& estimand) {
  DrawdownEstimate e;
  e.estimand = estimand;
  const std::size_t n = values.size();
  e.n_effective = n;
  e.paths = n;
  if (n == 0) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  e.estimate = mean;
  e.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return e;
}

namespace {

std::size_t resolve_horizon(const PathBatch& batch, std::optional<std::size_t> horizon) {
  const std::size_t h = horizon.value_or(batch.horizon);
  if (h > batch.horizon) fail(ErrorKind::Config, "estimator: horizon beyond the simulated horizon");
  return h;
}

void tag(DrawdownEstimate& e, const PathBatch& batch, std::size_t h, std::size_t k, double threshold) {
  e.horizon = h;
  e.seed = batch.master_seed;
  e.k = k;
  e.threshold = threshold;
}

}  // namespace

std::vector<double> stopped_values(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                   std::optional<std::size_t> horizon) {
  if (k < 1 || k > record.k_max) fail(ErrorKind::Config, "stopped value: k must lie in [1, k_max]");
  const std::size_t h = resolve_horizon(batch, horizon);
  std::vector<double> out(batch.size());
  for (std::size_t p = 0; p < batch.size(); ++p) {
    const auto& tau = record.tau[p];
    if (tau.size() >= k && tau[k - 1] <= h) {
      out[p] = batch.value(p, tau[k - 1]);
      continue;
    }
    if (record.known_until[p] < h)
      fail(ErrorKind::Config, "stopped value: path " + std::to_string(p) + " was frozen before drawdown " +
                                  std::to_string(k) + "; simulate with more drawdowns");
    out[p] = batch.value(p, h);
  }
  return out;
}

DrawdownEstimate estimate_stopped_value(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                        std::optional<std::size_t> horizon) {
  const std::size_t h = resolve_horizon(batch, horizon);
  const auto v = stopped_values(batch, record, k, h);
  auto e = mean_estimate(v, "stopped-value");
  tag(e, batch, h, k, 0.0);
  return e;
}

DrawdownEstimate estimate_mass_loss(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                    std::optional<std::size_t> horizon) {
  auto e = estimate_stopped_value(batch, record, k, horizon);
  e.estimand = "mass-loss";
  e.estimate = batch.x0 - e.estimate;
  return e;
}

DrawdownEstimate estimate_monotone_run(const PathBatch& batch, const DrawdownRecord& record,
                                       std::optional<std::size_t> horizon) {
  const std::size_t h = resolve_horizon(batch, horizon);
  const std::size_t k = record.run_start;
  std::vector<double> v(batch.size(), 0.0);
  if (k <= h) {
    for (std::size_t p = 0; p < batch.size(); ++p) {
      const std::size_t tt = record.tau_tilde[p];
      if ((tt == kUnknown && record.known_until[p] < h) || k > record.known_until[p])
        fail(ErrorKind::Config, "monotone run: path " + std::to_string(p) +
                                    " was frozen before the run could break; simulate with more drawdowns");
      const bool intact = batch.value(p, k) >= record.threshold && (tt == kUnknown || tt > h);
      if (intact) v[p] = batch.value(p, h);
    }
  }
  auto e = mean_estimate(v, "monotone-run");
  tag(e, batch, h, k, record.threshold);
  return e;
}

DrawdownEstimate estimate_terminal_mean(const PathBatch& batch, std::optional<std::size_t> horizon) {
  const std::size_t h = resolve_horizon(batch, horizon);
  std::vector<double> v(batch.size());
  for (std::size_t p = 0; p < batch.size(); ++p) {
    if (batch.known_until(p) < h) fail(ErrorKind::Config, "terminal mean: batch contains frozen paths");
    v[p] = batch.value(p, h);
  }
  auto e = mean_estimate(v, "terminal-mean");
  tag(e, batch, h, 0, 0.0);
  return e;
}

std::vector<DrawdownEstimate> mass_loss_ladder(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                               std::span<const std::size_t> horizons) {
  std::vector<DrawdownEstimate> out;
  for (std::size_t h : horizons) out.push_back(estimate_mass_loss(batch, record, k, h));
  return out;
}

std::vector<DrawdownEstimate> monotone_run_ladder(const PathBatch& batch, const DrawdownRecord& record,
                                                  std::span<const std::size_t> horizons) {
  std::vector<DrawdownEstimate> out;
  for (std::size_t h : horizons) out.push_back(estimate_monotone_run(batch, record, h));
  return out;
}

CsvTable ladder_csv(std::span<const DrawdownEstimate> ladder) {
  CsvTable t;
  t.header = {"n", "estimate", "std_error", "n_effective"};
  for (const auto& e : ladder)
    t.rows.push_back(
        {static_cast<double>(e.horizon), e.estimate, e.std_error, static_cast<double>(e.n_effective)});
  return t;
}

}  // namespace bubbles
