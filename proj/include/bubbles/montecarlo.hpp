#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bubbles/io.hpp"
#include "bubbles/kernel.hpp"
#include "bubbles/random.hpp"

namespace bubbles {

/// One-step sampler for a (possibly time-inhomogeneous) positive process.
class PathModel {
 public:
  virtual ~PathModel() = default;
  virtual std::string name() const = 0;
  /// Draw S_k given S_{k-1} = x (k >= 1).
  virtual double step(double x, std::size_t k, RandomStream& rng) const = 0;
  /// True when S stays at x forever from step k on (exact short-circuit).
  virtual bool absorbing(double /*x*/, std::size_t /*k*/) const { return false; }
};

class KernelPathModel final : public PathModel {
 public:
  explicit KernelPathModel(const MarkovKernel& kernel) : kernel_(kernel) {}
  std::string name() const override { return kernel_.name(); }
  double step(double x, std::size_t, RandomStream& rng) const override { return sample_step(kernel_, x, rng); }
  /// K(x, .) = delta_x.
  bool absorbing(double x, std::size_t) const override;

 private:
  const MarkovKernel& kernel_;
};

enum class HoldReason { None, Absorbed, Frozen };

/// Simulated paths S_0 = x0, ..., S_n. Each path is stored as the prefix that
/// was actually simulated; past its end the path holds its last value, either
/// exactly (Absorbed) or as a placeholder (Frozen, simulation stopped early).
struct PathBatch {
  double x0 = 0.0;
  std::size_t horizon = 0;
  std::uint64_t master_seed = 0;
  std::string model_ref;
  std::vector<std::vector<double>> paths;
  std::vector<HoldReason> hold;

  std::size_t size() const { return paths.size(); }
  /// S_step of path p; held value past the stored prefix.
  double value(std::size_t p, std::size_t step) const;
  /// Last index simulated or exactly known for path p.
  std::size_t known_until(std::size_t p) const;
};

struct SimulationOptions {
  /// Stop simulating a path once it has this many drawdowns (paths are then Frozen).
  std::optional<std::size_t> stop_after_drawdowns;
  unsigned threads = 1;
};

/// Path p draws from RandomStream(master_seed, p), so a batch depends only on
/// (model, x0, n, N, master_seed).
PathBatch simulate(const PathModel& model, double x0, std::size_t n, std::size_t paths, std::uint64_t master_seed,
                   const SimulationOptions& options = {});

CsvTable to_csv(const PathBatch& batch);
/// Horizon defaults to the longest stored prefix.
PathBatch path_batch_from_csv(const CsvTable& table, double x0, std::uint64_t master_seed, const std::string& model,
                              std::optional<std::size_t> horizon = std::nullopt);

/// Drawdown indices and run indicators per path.
struct DrawdownRecord {
  std::size_t k_max = 0;
  std::size_t run_start = 0;
  double threshold = 0.0;
  /// tau[p] lists tau_1 < tau_2 < ... found within the horizon (at most k_max).
  std::vector<std::vector<std::size_t>> tau;
  /// First drawdown index j > run_start; horizon + 1 when censored.
  std::vector<std::size_t> tau_tilde;
  /// 1{threshold <= S_k <= S_{k+1} <= ... <= S_n} at the full horizon.
  std::vector<bool> run_flag;
  /// Path information beyond this index is unavailable (frozen path).
  std::vector<std::size_t> known_until;
  std::size_t horizon = 0;

  bool censored(std::size_t p, std::size_t k) const { return tau[p].size() < k; }
};

/// Drawdown indices of a single path (all of them).
std::vector<std::size_t> drawdown_indices(std::span<const double> path);

DrawdownRecord drawdowns(const PathBatch& batch, std::size_t k_max, double threshold = 0.0,
                         std::size_t run_start = 0);

struct DrawdownEstimate {
  std::string estimand;  // stopped-value | mass-loss | monotone-run | terminal-mean
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;
  std::size_t horizon = 0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double threshold = 0.0;
};

Json to_json(const DrawdownEstimate& e);
DrawdownEstimate drawdown_estimate_from_json(const Json& j);

/// Per-path S_{tau_k ^ h}; h defaults to the batch horizon.
std::vector<double> stopped_values(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                   std::optional<std::size_t> horizon = std::nullopt);

/// Mean of S_{tau_k ^ h}.
DrawdownEstimate estimate_stopped_value(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                        std::optional<std::size_t> horizon = std::nullopt);

/// x0 - mean(S_{tau_k ^ h}); censored paths contribute S_h.
DrawdownEstimate estimate_mass_loss(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                    std::optional<std::size_t> horizon = std::nullopt);

/// Mean of S_h 1{x <= S_k <= ... <= S_h} with (k, x) from the record.
DrawdownEstimate estimate_monotone_run(const PathBatch& batch, const DrawdownRecord& record,
                                       std::optional<std::size_t> horizon = std::nullopt);

/// Mean of S_h; requires unfrozen paths.
DrawdownEstimate estimate_terminal_mean(const PathBatch& batch, std::optional<std::size_t> horizon = std::nullopt);

std::vector<DrawdownEstimate> mass_loss_ladder(const PathBatch& batch, const DrawdownRecord& record, std::size_t k,
                                               std::span<const std::size_t> horizons);
std::vector<DrawdownEstimate> monotone_run_ladder(const PathBatch& batch, const DrawdownRecord& record,
                                                  std::span<const std::size_t> horizons);

CsvTable ladder_csv(std::span<const DrawdownEstimate> ladder);

/// Sample mean and standard error (sample standard deviation / sqrt(N)),
/// accumulated in index order.
DrawdownEstimate mean_estimate(std::span<const double> values, const std::string& estimand);

}  // namespace bubbles
