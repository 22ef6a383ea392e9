#include "bubbles/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "bubbles/builtin_kernels.hpp"
#include "bubbles/error.hpp"
#include "bubbles/tabulated_kernel.hpp"

namespace bubbles {

// ==========================================================================
// Factories
// ==========================================================================

std::unique_ptr<MarkovKernel> make_kernel(const KernelSpec& s) {
  if (s.kind == "two-point-complete") return std::make_unique<TwoPointCompleteKernel>(s.a, s.c, s.p, s.b_max);
  if (s.kind == "absorbing-doubling") return std::make_unique<AbsorbingDoublingKernel>(s.level);
  if (s.kind == "uniform-doubling") return std::make_unique<UniformDoublingKernel>();
  if (s.kind == "affine-drop") return std::make_unique<AffineDropKernel>(s.coefficient);
  if (s.kind == "exponential-ratio") return std::make_unique<ExponentialRatioKernel>();
  if (s.kind == "gaussian-log-step") return std::make_unique<GaussianLogStepKernel>(s.sigma0, s.slope, s.floor);
  if (s.kind == "inverse-bessel-discretized") return std::make_unique<InverseBesselKernel>(s.alpha, s.beta);
  if (s.kind == "degenerate") return std::make_unique<DegenerateKernel>();
  if (s.kind == "user-defined") {
    if (s.table.empty()) fail(ErrorKind::Config, "kernel.table: required for user-defined kernels");
    return std::make_unique<TabulatedKernel>(TabulatedKernel::from_csv(s.table));
  }
  fail(ErrorKind::Config, "kernel.kind: unknown kernel '" + s.kind + "'");
}

IIDReturnModel make_iid_model(const IIDSpec& s) {
  if (s.model == "harmonic-binomial") return harmonic_binomial_model();
  if (s.model == "binomial") return iid_binomial_model(s.up, s.down, s.p);
  if (s.model == "lognormal") return iid_lognormal_model(s.sigma);
  if (s.model == "geometric-down") return geometric_down_model(s.down, s.r);
  fail(ErrorKind::Config, "iid.model: unknown model '" + s.model + "'");
}

DiscretizationSchedule BesselSpec::make_schedule() const {
  if (schedule == "relative") return DiscretizationSchedule::relative(alpha, beta);
  if (schedule == "deterministic") return DiscretizationSchedule::deterministic(a_seq, b_seq, b0);
  fail(ErrorKind::Config, "bessel.schedule: unknown schedule '" + schedule + "'");
}

// ==========================================================================
// TOML reader
// ==========================================================================

namespace {

class Section {
 public:
  Section(const toml::table* table, std::string path, const std::string& origin, std::size_t line)
      : table_(table), path_(std::move(path)), origin_(origin), line_(line) {}

  [[noreturn]] void error(const std::string& key, std::size_t line, const std::string& reason) const {
    fail(ErrorKind::Config, origin_ + ":" + std::to_string(line) + ": " + qualified(key) + ": " + reason);
  }

  void number(const std::string& key, double& out, const std::function<bool(double)>& ok = {},
              const char* requirement = "out of range") {
    const toml::node* n = take(key);
    if (!n) return;
    double v = 0.0;
    if (auto d = n->value_exact<double>())
      v = *d;
    else if (auto i = n->value_exact<std::int64_t>())
      v = static_cast<double>(*i);
    else
      error(key, line_of(*n), "expected a number");
    if (!std::isfinite(v) || (ok && !ok(v))) error(key, line_of(*n), requirement);
    out = v;
  }

  void number(const std::string& key, std::optional<double>& out, const std::function<bool(double)>& ok = {},
              const char* requirement = "out of range") {
    if (!table_ || !table_->contains(key)) return;
    double v = 0.0;
    number(key, v, ok, requirement);
    out = v;
  }

  template <class Int>
  void integer(const std::string& key, Int& out, std::int64_t min_value = 0) {
    const toml::node* n = take(key);
    if (!n) return;
    auto i = n->value_exact<std::int64_t>();
    if (!i) error(key, line_of(*n), "expected an integer");
    if (*i < min_value) error(key, line_of(*n), "must be at least " + std::to_string(min_value));
    out = static_cast<Int>(*i);
  }

  void boolean(const std::string& key, bool& out) {
    const toml::node* n = take(key);
    if (!n) return;
    auto b = n->value_exact<bool>();
    if (!b) error(key, line_of(*n), "expected true or false");
    out = *b;
  }

  void text(const std::string& key, std::string& out, const std::set<std::string>& allowed = {}) {
    const toml::node* n = take(key);
    if (!n) return;
    auto s = n->value_exact<std::string>();
    if (!s) error(key, line_of(*n), "expected a string");
    if (!allowed.empty() && !allowed.count(*s)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      error(key, line_of(*n), "'" + *s + "' is not one of {" + list + "}");
    }
    out = *s;
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    const toml::node* n = take(key);
    if (!n) return;
    const toml::array* arr = n->as_array();
    if (!arr) error(key, line_of(*n), "expected an array of numbers");
    out.clear();
    for (const toml::node& e : *arr) {
      if (auto d = e.value_exact<double>())
        out.push_back(*d);
      else if (auto i = e.value_exact<std::int64_t>())
        out.push_back(static_cast<double>(*i));
      else
        error(key, line_of(e), "expected an array of numbers");
    }
  }

  void counts(const std::string& key, std::vector<std::size_t>& out) {
    const toml::node* n = take(key);
    if (!n) return;
    const toml::array* arr = n->as_array();
    if (!arr) error(key, line_of(*n), "expected an array of integers");
    out.clear();
    for (const toml::node& e : *arr) {
      auto i = e.value_exact<std::int64_t>();
      if (!i || *i < 1) error(key, line_of(e), "expected positive integers");
      out.push_back(static_cast<std::size_t>(*i));
    }
  }

  const toml::array* array_of_tables(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return nullptr;
    const toml::array* arr = n->as_array();
    if (!arr || !arr->is_array_of_tables()) error(key, line_of(*n), "expected an array of tables");
    return arr;
  }

  /// Rejects every key that no getter asked for.
  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_)
      if (!seen_.count(std::string(k.str()))) error(std::string(k.str()), line_of(v), "unknown key");
  }

  std::size_t line() const { return line_; }
  const std::string& origin() const { return origin_; }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  static std::size_t line_of(const toml::node& n) { return n.source().begin.line; }

 private:
  const toml::node* take(const std::string& key) {
    seen_.insert(key);
    if (!table_) return nullptr;
    return table_->get(key);
  }

  const toml::table* table_;
  std::string path_;
  const std::string& origin_;
  std::size_t line_;
  std::set<std::string> seen_;
};

const auto positive = [](double v) { return v > 0.0; };
const auto nonnegative = [](double v) { return v >= 0.0; };
const auto unit_open = [](double v) { return v > 0.0 && v < 1.0; };

Section section(const toml::table& root, const std::string& name, const std::string& origin) {
  const toml::node* n = root.get(name);
  if (!n) return Section(nullptr, name, origin, 0);
  const toml::table* t = n->as_table();
  if (!t) fail(ErrorKind::Config, origin + ":" + std::to_string(n->source().begin.line) + ": " + name +
                                      ": expected a table");
  return Section(t, name, origin, n->source().begin.line);
}

TailBound read_certificate(const toml::table& t, const std::string& origin, std::size_t index) {
  Section s(&t, "classify.certificate[" + std::to_string(index) + "]", origin, t.source().begin.line);
  TailBound b;
  std::string side = "upper", shape = "power";
  s.text("side", side, {"upper", "lower"});
  s.text("shape", shape, {"power", "gaussian"});
  b.side = side == "upper" ? BoundSide::Upper : BoundSide::Lower;
  b.shape = shape == "power" ? BoundShape::Power : BoundShape::Gaussian;
  s.number("coefficient", b.coefficient, nonnegative, "must be nonnegative");
  s.number("rate", b.rate);
  s.number("center", b.center);
  s.number("x_from", b.x_from, positive, "must be positive");
  s.number("epsilon", b.epsilon, nonnegative, "must be nonnegative");
  s.text("source", b.source);
  if (b.shape == BoundShape::Gaussian && !(b.rate > 0.0)) s.error("rate", s.line(), "gaussian rate must be positive");
  s.finish();
  return b;
}

}  // namespace

// ==========================================================================
// Parsing
// ==========================================================================

RunConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    fail(ErrorKind::Config, origin + ":" + std::to_string(e.source().begin.line) + ": " +
                                std::string(e.description()));
  }
  const std::set<std::string> sections{"kernel", "grid", "classify", "solver", "simulation", "iid", "bessel", "output"};
  for (const auto& [k, v] : root)
    if (!sections.count(std::string(k.str())))
      fail(ErrorKind::Config, origin + ":" + std::to_string(v.source().begin.line) + ": " + std::string(k.str()) +
                                  ": unknown section");

  RunConfig c;
  {
    Section s = section(root, "kernel", origin);
    auto& k = c.kernel;
    s.text("kind", k.kind,
           {"two-point-complete", "absorbing-doubling", "uniform-doubling", "affine-drop", "exponential-ratio",
            "gaussian-log-step", "inverse-bessel-discretized", "degenerate", "user-defined"});
    s.number("a", k.a, unit_open, "must lie in (0, 1)");
    s.number("c", k.c, nonnegative, "must be nonnegative");
    s.number("p", k.p, nonnegative, "must be nonnegative");
    s.number("b_max", k.b_max, nonnegative, "must be nonnegative");
    s.number("level", k.level, positive, "must be positive");
    s.number("coefficient", k.coefficient, positive, "must be positive");
    s.number("sigma0", k.sigma0);
    s.number("slope", k.slope, nonnegative, "must be nonnegative");
    s.number("floor", k.floor, nonnegative, "must be nonnegative");
    s.number("alpha", k.alpha, positive, "must be positive");
    s.number("beta", k.beta, positive, "must be positive");
    std::string table;
    s.text("table", table);
    if (!table.empty()) k.table = base_dir / table;
    if (k.kind == "user-defined" && k.table.empty()) s.error("table", s.line(), "required for user-defined kernels");
    s.finish();
  }
  {
    Section s = section(root, "grid", origin);
    s.number("x_min", c.grid.x_min, positive, "must be positive");
    s.number("x_max", c.grid.x_max, positive, "must be positive");
    s.integer("points", c.grid.points, 2);
    if (!(c.grid.x_max > c.grid.x_min)) s.error("x_max", s.line(), "must exceed x_min");
    s.finish();
  }
  {
    Section s = section(root, "classify", origin);
    auto& k = c.classify;
    s.number("epsilon", k.epsilon, nonnegative, "must be nonnegative");
    s.number("x_a", k.x_a, positive, "must be positive");
    s.number("tail_start", k.tail.x_start, positive, "must be positive");
    s.number("tail_end", k.tail.x_end, positive, "must be positive");
    s.integer("tail_points", k.tail.points, 2);
    s.boolean("analytic_bounds", k.analytic_bounds);
    if (const toml::array* certs = s.array_of_tables("certificate"))
      for (std::size_t i = 0; i < certs->size(); ++i)
        k.certificates.push_back(read_certificate(*certs->get(i)->as_table(), origin, i));
    if (!(k.tail.x_end > k.tail.x_start)) s.error("tail_end", s.line(), "must exceed tail_start");
    s.finish();
  }
  {
    Section s = section(root, "solver", origin);
    auto& k = c.solver;
    s.text("method", k.method, {"picard", "contraction"});
    s.number("tol", k.tol, positive, "must be positive");
    s.integer("max_iter", k.max_iter, 1);
    s.number("alpha", k.alpha, unit_open, "must lie in (0, 1)");
    s.number("beta", k.beta, nonnegative, "must be nonnegative");
    s.finish();
  }
  {
    Section s = section(root, "simulation", origin);
    auto& k = c.simulation;
    s.text("model", k.model, {"kernel", "iid"});
    s.text("estimand", k.estimand, {"mass-loss", "monotone-run", "stopped-value", "terminal-mean"});
    s.number("x0", k.x0, positive, "must be positive");
    s.integer("steps", k.steps, 1);
    s.integer("paths", k.paths, 1);
    s.integer("seed", k.seed, 0);
    s.integer("threads", k.threads, 1);
    s.integer("k", k.k, 1);
    s.number("threshold", k.threshold, nonnegative, "must be nonnegative");
    s.integer("run_start", k.run_start, 0);
    s.counts("horizons", k.horizons);
    s.finish();
  }
  {
    Section s = section(root, "iid", origin);
    auto& k = c.iid;
    s.text("model", k.model, {"harmonic-binomial", "binomial", "lognormal", "geometric-down"});
    s.number("up", k.up, positive, "must be positive");
    s.number("down", k.down, positive, "must be positive");
    s.number("p", k.p, unit_open, "must lie in (0, 1)");
    s.number("sigma", k.sigma, positive, "must be positive");
    s.number("r", k.r, unit_open, "must lie in (0, 1)");
    s.integer("partial_terms", k.partial_terms, 1);
    s.integer("product_terms", k.product_terms, 1);
    s.finish();
  }
  {
    Section s = section(root, "bessel", origin);
    auto& k = c.bessel;
    s.text("driver", k.driver, {"kernel", "inverse-bessel", "geometric-brownian", "euler"});
    s.text("schedule", k.schedule, {"relative", "deterministic"});
    s.number("x0", k.x0, positive, "must be positive");
    s.number("alpha", k.alpha, positive, "must be positive");
    s.number("beta", k.beta, positive, "must be positive");
    s.numbers("a_seq", k.a_seq);
    s.numbers("b_seq", k.b_seq);
    s.number("b0", k.b0, positive, "must be positive");
    s.number("dt", k.dt, nonnegative, "must be nonnegative");
    s.number("sigma", k.sigma, positive, "must be positive");
    s.number("scale", k.scale, positive, "must be positive");
    s.number("power", k.power);
    s.boolean("compare_gbm", k.compare_gbm);
    s.integer("steps", k.steps, 1);
    s.integer("paths", k.paths, 1);
    s.integer("seed", k.seed, 0);
    s.integer("threads", k.threads, 1);
    if (k.driver == "kernel" && k.schedule != "relative")
      s.error("schedule", s.line(), "the kernel driver realizes the relative schedule only");
    try {
      k.make_schedule();
    } catch (const Error& e) {
      s.error("schedule", s.line(), e.what());
    }
    s.finish();
  }
  {
    Section s = section(root, "output", origin);
    std::string dir;
    s.text("dir", dir);
    if (!dir.empty()) c.output.dir = base_dir / dir;
    s.text("format", c.output.format, {"csv", "json"});
    s.finish();
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

void validate_config(const RunConfig& c) {
  if (!(c.grid.x_min > 0.0) || !(c.grid.x_max > c.grid.x_min) || c.grid.points < 2)
    fail(ErrorKind::Config, "grid: need 0 < x_min < x_max and at least two points");
  if (!(c.solver.tol > 0.0)) fail(ErrorKind::Config, "solver.tol: must be positive");
  if (c.solver.max_iter < 1) fail(ErrorKind::Config, "solver.max_iter: must be at least 1");
  if (c.simulation.paths < 1 || c.simulation.steps < 1)
    fail(ErrorKind::Config, "simulation: paths and steps must be at least 1");
  for (std::size_t h : c.simulation.horizons)
    if (h > c.simulation.steps) fail(ErrorKind::Config, "simulation.horizons: entries must not exceed steps");
  if (c.bessel.paths < 1 || c.bessel.steps < 1) fail(ErrorKind::Config, "bessel: paths and steps must be at least 1");
  if (c.output.format != "csv" && c.output.format != "json")
    fail(ErrorKind::Config, "output.format: expected csv or json");
}

}  // namespace bubbles
