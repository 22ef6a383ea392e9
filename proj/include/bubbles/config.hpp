#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bubbles/certificates.hpp"
#include "bubbles/ctdiscretize.hpp"
#include "bubbles/grid.hpp"
#include "bubbles/iid.hpp"
#include "bubbles/kernel.hpp"

namespace bubbles {

/// Built-in kernel family plus its parameters; `table` is a CSV path for user-defined kernels.
struct KernelSpec {
  std::string kind = "exponential-ratio";
  double a = 0.5, c = 0.25, p = 0.0, b_max = 0.25;  // two-point-complete
  double level = 0.5;                               // absorbing-doubling
  double coefficient = 2.0 / 3.0;                   // affine-drop
  double sigma0 = 1.0, slope = 0.0, floor = 0.0;    // gaussian-log-step
  double alpha = 1.0, beta = 1.0;                   // inverse-bessel-discretized
  std::filesystem::path table;                      // user-defined
};

std::unique_ptr<MarkovKernel> make_kernel(const KernelSpec& spec);

struct IIDSpec {
  std::string model = "harmonic-binomial";  // harmonic-binomial | binomial | lognormal | geometric-down
  double up = 1.5, down = 0.5, p = 0.5;
  double sigma = 1.0;
  double r = 0.5;
  std::size_t partial_terms = 1000;
  std::size_t product_terms = 2000;
};

IIDReturnModel make_iid_model(const IIDSpec& spec);

struct GridSpec {
  double x_min = 1e-2;
  double x_max = 1e3;
  std::size_t points = 400;
};

struct ClassifySpec {
  double epsilon = 1.0;
  double x_a = 1e-2;
  TailGrid tail;
  bool analytic_bounds = true;
  std::vector<TailBound> certificates;
};

struct SolverSpec {
  std::string method = "picard";  // picard | contraction
  double tol = 1e-10;
  std::size_t max_iter = 10000;
  /// Contraction certificate; grid constants are used when absent.
  std::optional<double> alpha;
  std::optional<double> beta;
};

struct SimulationSpec {
  std::string model = "kernel";  // kernel | iid
  std::string estimand = "mass-loss";  // mass-loss | monotone-run | stopped-value | terminal-mean
  double x0 = 1.0;
  std::size_t steps = 60;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t k = 1;
  double threshold = 0.0;
  std::size_t run_start = 0;
  std::vector<std::size_t> horizons;
};

struct BesselSpec {
  std::string driver = "kernel";  // kernel | inverse-bessel | geometric-brownian | euler
  std::string schedule = "relative";  // relative | deterministic
  double x0 = 1.0;
  double alpha = 1.0, beta = 1.0;
  std::vector<double> a_seq, b_seq;
  double b0 = 2.0;
  double dt = 0.0;
  double sigma = 1.0;               // geometric-brownian
  double scale = 1.0, power = 2.0;  // euler: dX = scale X^power dW
  bool compare_gbm = true;
  std::size_t steps = 100;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  DiscretizationSchedule make_schedule() const;
};

struct OutputSpec {
  std::filesystem::path dir = ".";
  std::string format = "csv";  // csv | json (encoding of tables)
};

/// Whole configuration; every field has a default so a file only lists overrides.
struct RunConfig {
  KernelSpec kernel;
  GridSpec grid;
  ClassifySpec classify;
  SolverSpec solver;
  SimulationSpec simulation;
  IIDSpec iid;
  BesselSpec bessel;
  OutputSpec output;
};

/// Parses TOML text. Unknown tables or keys, wrong types and out-of-range
/// values raise Config errors of the form "<origin>:<line>: <key>: <reason>".
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Checks ranges across sections (also run after command-line overrides).
void validate_config(const RunConfig& config);

}  // namespace bubbles
