#include "bubbles/cli.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bubbles/classify.hpp"
#include "bubbles/config.hpp"
#include "bubbles/ctdiscretize.hpp"
#include "bubbles/error.hpp"
#include "bubbles/iid.hpp"
#include "bubbles/io.hpp"
#include "bubbles/montecarlo.hpp"
#include "bubbles/volterra.hpp"

namespace bubbles {

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> steps;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::string> format;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.out) c.output.dir = *o.out;
  if (o.format) c.output.format = *o.format;
  if (o.seed) c.simulation.seed = c.bessel.seed = *o.seed;
  if (o.paths) c.simulation.paths = c.bessel.paths = *o.paths;
  if (o.steps) c.simulation.steps = c.bessel.steps = *o.steps;
  if (o.tol) c.solver.tol = *o.tol;
  if (o.max_iter) c.solver.max_iter = *o.max_iter;
  validate_config(c);
  return c;
}

class Writer {
 public:
  explicit Writer(const OutputSpec& spec) : spec_(spec) { std::filesystem::create_directories(spec.dir); }

  /// Writes <stem>.csv or <stem>.json depending on the table format.
  std::filesystem::path table(const std::string& stem, const CsvTable& t) const {
    if (spec_.format == "json") {
      const auto path = spec_.dir / (stem + ".json");
      write_json(path, table_to_json(t));
      return path;
    }
    const auto path = spec_.dir / (stem + ".csv");
    write_csv(path, t);
    return path;
  }

  std::filesystem::path json(const std::string& stem, const Json& j) const {
    const auto path = spec_.dir / (stem + ".json");
    write_json(path, j);
    return path;
  }

 private:
  const OutputSpec& spec_;
};

std::vector<std::size_t> default_horizons(std::size_t n) {
  std::vector<std::size_t> h;
  for (std::size_t base = 1; base < n; base *= 10)
    for (std::size_t m : std::array<std::size_t, 3>{1, 2, 5})
      if (base * m < n) h.push_back(base * m);
  h.push_back(n);
  return h;
}

CsvTable estimates_table(std::span<const DrawdownEstimate> ladder) { return ladder_csv(ladder); }

void print_estimate(std::ostream& out, const DrawdownEstimate& e) {
  out << e.estimand << " " << format_double(e.estimate) << " std_error " << format_double(e.std_error) << " n "
      << e.horizon << " N " << e.paths << "\n";
}

// ==========================================================================
// Subcommands
// ==========================================================================

int cmd_kernel_report(const RunConfig& c, std::ostream& out) {
  const auto kernel = make_kernel(c.kernel);
  const auto xs = log_grid(c.grid.x_min, c.grid.x_max, c.grid.points);
  CsvTable t;
  t.header = {"x", "a", "b", "b_eps"};
  for (double x : xs) {
    const auto d = diagnose(*kernel, x, c.classify.epsilon);
    t.rows.push_back({x, d.a, d.b, d.b_eps});
  }
  ClassifyOptions opt;
  opt.tail = c.classify.tail;
  opt.epsilon = c.classify.epsilon;
  opt.x_a = c.classify.x_a;
  opt.certificates = c.classify.certificates;
  opt.use_analytic_bounds = c.classify.analytic_bounds;
  const BubbleVerdict v = classify_markov_bubble(*kernel, opt);
  const Writer w(c.output);
  w.table("kernel_report", t);
  w.json("verdict", to_json(v));
  out << kernel->name() << " verdict " << to_string(v.verdict) << " criterion " << v.criterion << "\n";
  return kExitSuccess;
}

int cmd_solve_default(const RunConfig& c, std::ostream& out) {
  const auto kernel = make_kernel(c.kernel);
  auto xs = log_grid(c.grid.x_min, c.grid.x_max, c.grid.points);
  SolveOptions opt;
  opt.tol = c.solver.tol;
  opt.max_iter = c.solver.max_iter;
  SolveReport report;
  GridFunction m;
  if (c.solver.method == "contraction") {
    ContractionCertificate cert = grid_contraction_constants(*kernel, xs);
    if (c.solver.alpha) cert.alpha = *c.solver.alpha;
    if (c.solver.beta) cert.beta = *c.solver.beta;
    m = contraction_solve(*kernel, xs, cert, opt, report);
  } else {
    m = picard_from_identity(*kernel, xs, opt, report);
  }
  const Writer w(c.output);
  w.table("default_function", to_csv(m));
  w.json("solve_report", to_json(report));
  out << report.method << " iterations " << report.iterations << " sup_residual "
      << format_double(report.sup_residual) << (report.converged ? " converged" : " not converged") << "\n";
  return report.converged ? kExitSuccess : kExitNonConvergence;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const auto& s = c.simulation;
  std::unique_ptr<MarkovKernel> kernel;
  std::optional<IIDReturnModel> iid;
  std::unique_ptr<PathModel> model;
  if (s.model == "iid") {
    iid.emplace(make_iid_model(c.iid));
    iid->validate(s.steps);
    model = std::make_unique<IIDPathModel>(*iid);
  } else {
    kernel = make_kernel(c.kernel);
    model = std::make_unique<KernelPathModel>(*kernel);
  }
  SimulationOptions sim;
  sim.threads = s.threads;
  if (s.estimand == "mass-loss" || s.estimand == "stopped-value") sim.stop_after_drawdowns = s.k;
  if (s.estimand == "monotone-run" && s.run_start == 0) sim.stop_after_drawdowns = 1;
  const PathBatch batch = simulate(*model, s.x0, s.steps, s.paths, s.seed, sim);
  const auto horizons = s.horizons.empty() ? default_horizons(s.steps) : s.horizons;

  DrawdownEstimate est;
  std::vector<DrawdownEstimate> ladder;
  if (s.estimand == "mass-loss") {
    const auto rec = drawdowns(batch, s.k);
    est = estimate_mass_loss(batch, rec, s.k);
    ladder = mass_loss_ladder(batch, rec, s.k, horizons);
  } else if (s.estimand == "stopped-value") {
    const auto rec = drawdowns(batch, s.k);
    est = estimate_stopped_value(batch, rec, s.k);
    for (std::size_t h : horizons) ladder.push_back(estimate_stopped_value(batch, rec, s.k, h));
  } else if (s.estimand == "monotone-run") {
    const auto rec = drawdowns(batch, 1, s.threshold, s.run_start);
    est = estimate_monotone_run(batch, rec);
    ladder = monotone_run_ladder(batch, rec, horizons);
  } else {
    est = estimate_terminal_mean(batch);
    for (std::size_t h : horizons) ladder.push_back(estimate_terminal_mean(batch, h));
  }
  const Writer w(c.output);
  w.json("estimate", to_json(est));
  w.table("ladder", estimates_table(ladder));
  out << model->name() << " ";
  print_estimate(out, est);
  return kExitSuccess;
}

int cmd_iid_check(const RunConfig& c, std::ostream& out) {
  const IIDReturnModel model = make_iid_model(c.iid);
  const std::size_t n = c.iid.partial_terms;
  BubbleVerdict v = iid_bubble_check(model, n);
  CsvTable t;
  t.header = {"k", "a", "b", "sum_a", "sum_b"};
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = model.a(k), b = model.b(k);
    sa += a;
    sb += b;
    t.rows.push_back({static_cast<double>(k), a, b, sa, sb});
  }
  const SurvivalProduct sp = survival_product(model, 1, n);
  v.evidence["survival_product_partial"] = sp.value;
  v.evidence["survival_product_limit_lower"] = sp.limit_lower;
  v.evidence["survival_product_limit_upper"] = sp.limit_upper;
  v.evidence["appendix_product"] = appendix_product(c.iid.product_terms);
  const Writer w(c.output);
  w.table("iid_terms", t);
  w.json("verdict", to_json(v));
  out << model.name() << " verdict " << to_string(v.verdict) << " criterion " << v.criterion << "\n";
  return kExitSuccess;
}

int cmd_bessel(const RunConfig& c, std::ostream& out) {
  const auto& b = c.bessel;
  const Writer w(c.output);
  DrawdownEstimate est;
  std::vector<DrawdownEstimate> ladder;
  std::string ladder_name;
  std::size_t exploded = 0, nonpositive = 0;
  const DiscretizationSchedule schedule = b.make_schedule();
  std::vector<std::size_t> horizons = default_horizons(b.steps);
  if (b.driver == "kernel") {
    const BesselBubbleReport r = bessel_bubble_report(b.x0, b.alpha, b.beta, b.steps, b.paths, b.seed, b.threads);
    est = r.mass_loss;
    ladder = r.run_ladder;
    ladder_name = "run_ladder";
  } else {
    std::unique_ptr<Driver> driver;
    if (b.driver == "inverse-bessel")
      driver = std::make_unique<InverseBesselDriver>();
    else if (b.driver == "geometric-brownian")
      driver = std::make_unique<GeometricBrownianDriver>(b.sigma);
    else
      driver = std::make_unique<EulerDiffusionDriver>(b.scale, b.power);
    DiscretizeOptions opt;
    opt.dt = b.dt;
    opt.simulation.threads = b.threads;
    opt.simulation.stop_after_drawdowns = 1;
    const auto r = discretize_sde_path(*driver, schedule, b.x0, b.steps, b.paths, b.seed, opt);
    const auto rec = drawdowns(r.batch, 1);
    est = estimate_mass_loss(r.batch, rec, 1);
    ladder = mass_loss_ladder(r.batch, rec, 1, horizons);
    ladder_name = "mass_loss_ladder";
    exploded = r.exploded;
    nonpositive = r.nonpositive;
  }
  Json j{{"driver", b.driver}, {"schedule", b.schedule}, {"mass_loss", to_json(est)},
         {"exploded", exploded}, {"nonpositive", nonpositive}};
  if (b.schedule == "relative") j["atom_weight"] = bessel_atom_weight(b.x0, b.alpha, b.beta);
  out << "inverse-bessel " << b.driver << " ";
  print_estimate(out, est);
  if (b.compare_gbm) {
    const GeometricBrownianDriver gbm(b.sigma);
    DiscretizeOptions opt;
    opt.dt = b.dt;
    opt.simulation.threads = b.threads;
    opt.simulation.stop_after_drawdowns = 1;
    const auto r = discretize_sde_path(gbm, schedule, b.x0, b.steps, b.paths, b.seed, opt);
    const DrawdownEstimate g = estimate_mass_loss(r.batch, drawdowns(r.batch, 1), 1);
    j["gbm_mass_loss"] = to_json(g);
    out << "geometric-brownian ";
    print_estimate(out, g);
  }
  w.json("bessel", j);
  w.json("estimate", to_json(est));
  w.table(ladder_name, ladder_csv(ladder));
  if (b.schedule == "relative") {
    CsvTable t;
    t.header = {"z", "cdf", "density"};
    const InverseBesselKernel kernel(b.alpha, b.beta);
    const double top = (1.0 + b.beta) * b.x0;
    for (int i = 1; i < 200; ++i) {
      const double z = top * i / 200.0;
      t.rows.push_back({z, bessel_cdf(b.x0, b.alpha, b.beta, z), kernel.density(b.x0, z)});
    }
    w.table("bessel_cdf", t);
  }
  return kExitSuccess;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::DegenerateModel: return kExitConfig;
    case ErrorKind::NonConvergence: return kExitNonConvergence;
    case ErrorKind::CertificateRejected:
    case ErrorKind::HypothesisViolation: return kExitCertificate;
    default: return kExitFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bubble diagnostics for discrete-time nonnegative martingales", "bubbles"};
  app.require_subcommand(1);
  Overrides o;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const std::array<Command, 5> commands{{
      {"kernel-report", "a(x), b(x), b_eps(x) on the grid and the Markov bubble verdict", cmd_kernel_report},
      {"solve-default", "default function M_S from the Volterra equation M = K(M)", cmd_solve_default},
      {"simulate", "Monte Carlo drawdown estimates with a horizon ladder", cmd_simulate},
      {"iid-check", "independent-increments criterion and survival products", cmd_iid_check},
      {"bessel", "inverse Bessel discretization: mass loss and ladders", cmd_bessel},
  }};
  std::vector<CLI::App*> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", o.config, "TOML config file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--paths", o.paths, "number of paths N")->check(CLI::PositiveNumber);
    sub->add_option("--steps", o.steps, "horizon n")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol, "solver tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", o.max_iter, "solver iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "table encoding")->check(CLI::IsMember({"csv", "json"}));
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitConfig;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      const RunConfig c = resolve(o);
      return commands[i].run(c, out);
    } catch (const Error& e) {
      err << "bubbles " << commands[i].name << ": " << to_string(e.kind()) << " error: " << e.what() << "\n";
      return exit_code_for(e.kind());
    } catch (const std::exception& e) {
      err << "bubbles " << commands[i].name << ": " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitConfig;
}

}  // namespace bubbles
