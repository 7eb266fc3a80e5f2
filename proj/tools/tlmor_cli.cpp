#include "tlmor/matrix_io.hpp"
#include "tlmor/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace tlmor;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<Index> paths;
  std::optional<Index> steps;
  std::optional<int> threads;
  std::string strategy;
  std::string orders;
  std::vector<std::string> settings;
  bool dry_run = false;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  for (const std::string& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.paths) cfg.paths = *o.paths;
  if (o.steps) cfg.steps = *o.steps;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.strategy.empty()) cfg.strategy = parse_strategy(o.strategy);
  if (!o.orders.empty()) cfg.orders = parse_orders(o.orders);
  return cfg;
}

// Output file inside the configured directory; the directory is created on demand.
std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

class Report {
 public:
  Report(const ExperimentConfig& cfg, const std::string& command) : cfg_(cfg), command_(command) {
    body_ << "# tlmor " << command << "\n# seed = " << cfg.seed << "\n" << render_config(cfg) << "\n";
  }
  std::ostream& body() { return body_; }
  void finish() {
    std::cout << body_.str();
    auto f = open_out(cfg_, command_ + "_report.txt");
    f << body_.str();
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::ostringstream body_;
};

std::string file_tag(const ExperimentConfig& cfg) { return to_string(cfg.strategy); }

GramianSet compute_gramians(const ExperimentConfig& cfg, const StochasticLinearSystem& sys) {
  const LyapunovSolveOptions lyap = cfg.lyapunov_options();
  switch (cfg.strategy) {
    case GramianStrategy::Exact: return exact_gramians(sys, cfg.bench.T, lyap);
    case GramianStrategy::Sampled: return sampled_gramians(sys, cfg.bench.T, cfg.estimator_config(), lyap);
    case GramianStrategy::Approx: return approx_gramians(sys, cfg.bench.T, cfg.approx_config(), lyap);
  }
  throw Error("unknown strategy");
}

BalancingTransform transform_of(const ExperimentConfig& cfg, const GramianSet& g) {
  return cfg.transform == TransformKind::Modal ? modal_transform(g.P) : balanced_transform(g.P, g.Q);
}

void print_rows(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "strategy  T  rho  r  mc_error  mc_stderr  bound\n";
  for (const ResultRow& r : rows) {
    os << to_string(r.strategy) << "  " << r.T << "  " << r.rho << "  " << r.r << "  " << io::format_double(r.mc_error)
       << "  " << io::format_double(r.mc_stderr) << "  " << (r.bound ? io::format_double(r.bound->bound) : "-")
       << "\n";
  }
}

int cmd_benchmark(const ExperimentConfig& cfg) {
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg.bench);
  {
    auto f = open_out(cfg, "system.txt");
    io::write_system(f, sys);
  }
  Report rep(cfg, "benchmark");
  const Vector a = sys.A.diagonal();
  rep.body() << "n = " << sys.n() << "\nq = " << sys.q() << "\nA11 = " << io::format_double(a(0))
             << "\nunstable_modes = " << (a.array() > 0.0).count()
             << "\nmin_drift_eigenvalue = " << io::format_double(a.minCoeff())
             << "\nnoise_norm = " << io::format_double(sys.N[0].norm()) << "\nwritten = system.txt\n";
  rep.finish();
  return 0;
}

int cmd_gramians(const ExperimentConfig& cfg) {
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg.bench);
  const GramianSet g = compute_gramians(cfg, sys);
  const std::string tag = file_tag(cfg);
  {
    io::MatrixBundle b;
    b.header = {"GRAMIANS", std::to_string(sys.n()), tag, io::format_double(cfg.bench.T)};
    b.matrices = {{"P", g.P}, {"Q", g.Q}, {"F_T", g.F_T}, {"G_T", g.G_T}};
    auto f = open_out(cfg, "gramians_" + tag + ".txt");
    io::write_bundle(f, b);
  }
  const BalancingTransform tr = transform_of(cfg, g);
  {
    auto f = open_out(cfg, "hsv_" + tag + ".csv");
    write_hsv_csv(f, tr.sigma);
  }
  Report rep(cfg, "gramians");
  rep.body() << "provenance = " << to_string(g.provenance) << "\n";
  for (const auto& [k, v] : g.diagnostics) rep.body() << k << " = " << io::format_double(v) << "\n";
  for (Index i = 0; i < std::min<Index>(10, tr.sigma.size()); ++i)
    rep.body() << "sigma_" << i + 1 << " = " << io::format_double(tr.sigma(i)) << "\n";
  rep.finish();
  return 0;
}

int cmd_reduce(const ExperimentConfig& cfg) {
  const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg.bench);
  const GramianSet g = compute_gramians(cfg, sys);
  const BalancingTransform tr = transform_of(cfg, g);
  const std::string tag = file_tag(cfg);
  Report rep(cfg, "reduce");
  for (Index r : cfg.orders) {
    const ReducedSystem rom = truncate(sys, tr, r);
    const std::string name = "rom_" + tag + "_r" + std::to_string(r) + ".txt";
    auto f = open_out(cfg, name);
    write_rom(f, rom);
    rep.body() << "r = " << r << "  sigma_truncated_sum = " << io::format_double(rom.sigma2.sum())
               << "  written = " << name << "\n";
  }
  rep.body() << "suggested_order(1e-5) = " << suggest_order(tr.sigma, 1e-5) << "\n";
  rep.finish();
  return 0;
}

int cmd_bound(const ExperimentConfig& cfg) {
  CaseOptions o;
  o.strategies = {cfg.strategy};
  o.simulate = false;
  const CaseResult res = run_case(cfg, o, &std::cerr);
  if (!res.exact) throw Error("bound: exact reachability Gramian unavailable");
  {
    auto f = open_out(cfg, "bound_" + file_tag(cfg) + ".csv");
    write_bound_csv_header(f);
    for (const ResultRow& r : res.rows) write_bound_csv_row(f, *r.bound);
  }
  Report rep(cfg, "bound");
  for (const ResultRow& r : res.rows) rep.body() << to_key_value(*r.bound) << "\n";
  rep.finish();
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  CaseOptions o;
  o.strategies = {cfg.strategy};
  o.bound = false;
  const CaseResult res = run_case(cfg, o, &std::cerr);
  const std::string tag = file_tag(cfg);
  {
    auto f = open_out(cfg, "results_" + tag + ".csv");
    write_results_csv(f, res.rows);
  }
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    auto f = open_out(cfg, "profile_" + tag + "_r" + std::to_string(res.rows[i].r) + ".csv");
    write_error_profile(f, res.profiles[i]);
  }
  Report rep(cfg, "simulate");
  print_rows(rep.body(), res.rows);
  rep.finish();
  return 0;
}

int cmd_experiment(ExperimentConfig cfg, const std::string& which) {
  Report rep(cfg, "experiment_" + which);
  std::vector<ResultRow> rows;
  if (which == "fig1") {
    cfg.strategy = GramianStrategy::Exact;
    const StochasticLinearSystem sys = build_heat_spde_benchmark(cfg.bench);
    const GramianSet g = exact_gramians(sys, cfg.bench.T, cfg.lyapunov_options());
    const BalancingTransform tr = transform_of(cfg, g);
    auto f = open_out(cfg, "fig1.csv");
    write_hsv_csv(f, tr.sigma.head(std::min<Index>(50, tr.sigma.size())));
    for (Index i = 0; i < std::min<Index>(12, tr.sigma.size()); ++i)
      rep.body() << "sigma_" << i + 1 << " = " << io::format_double(tr.sigma(i)) << "\n";
    rep.finish();
    return 0;
  }
  std::string grid_key = "strategy";
  if (which == "fig2") {
    CaseOptions o;
    o.strategies = {GramianStrategy::Exact};
    rows = run_case(cfg, o, &std::cerr).rows;
    auto f = open_out(cfg, "fig2.csv");
    write_bound_plot_csv(f, rows);
  } else if (which == "table1") {
    rows = experiment_table1(cfg, &std::cerr);
  } else if (which == "table2") {
    rows = experiment_table2(cfg, &std::cerr);
  } else if (which == "table3") {
    rows = experiment_table3(cfg, {0.5, 1.0, 2.0, 3.0}, &std::cerr);
    grid_key = "T";
  } else if (which == "table4") {
    rows = experiment_table4(cfg, {0.0, 0.5, 1.0}, &std::cerr);
    grid_key = "rho";
  } else {
    throw Error("unknown experiment " + which);
  }
  {
    auto f = open_out(cfg, which + "_rows.csv");
    write_results_csv(f, rows);
  }
  if (which != "fig2") {
    auto f = open_out(cfg, which + ".csv");
    write_grid_csv(f, rows, grid_key);
  }
  print_rows(rep.body(), rows);
  rep.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-limited balanced truncation for linear stochastic systems"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Key-value configuration file");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Top-level seed");
  app.add_option("--paths", o.paths, "Monte Carlo paths");
  app.add_option("--steps", o.steps, "Time steps per unit time");
  app.add_option("--threads", o.threads, "Simulation threads");
  app.add_option("--strategy", o.strategy, "Gramian strategy: exact, sampled or approx");
  app.add_option("--orders", o.orders, "Reduced orders, e.g. 2,4,8,16 or 2-20");
  app.add_option("--set", o.settings, "Override a configuration key (key=value)");
  app.add_flag("--dry-run", o.dry_run, "Validate the configuration and exit");

  auto* benchmark = app.add_subcommand("benchmark", "Write the benchmark system file");
  auto* gramians = app.add_subcommand("gramians", "Compute Gramians and Hankel singular values");
  auto* reduce = app.add_subcommand("reduce", "Write reduced models for the configured orders");
  auto* bound = app.add_subcommand("bound", "Evaluate the a-posteriori error bound");
  auto* simulate = app.add_subcommand("simulate", "Estimate reduction errors by simulation");
  auto* experiment = app.add_subcommand("experiment", "Run a figure or table experiment");
  std::string which;
  experiment->add_option("name", which, "fig1, fig2, table1, table2, table3 or table4")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "table1", "table2", "table3", "table4"}));

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = resolve(o);
    if (experiment->parsed() && which == "fig2" && o.orders.empty()) cfg.orders = parse_orders("2-20");
    if (experiment->parsed() && which == "table2") cfg.bench.n = 1000;
    cfg.validate();
    if (o.dry_run) {
      std::cout << "# configuration valid\n# seed = " << cfg.seed << "\n" << render_config(cfg);
      return 0;
    }
    if (benchmark->parsed()) return cmd_benchmark(cfg);
    if (gramians->parsed()) return cmd_gramians(cfg);
    if (reduce->parsed()) return cmd_reduce(cfg);
    if (bound->parsed()) return cmd_bound(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    return cmd_experiment(cfg, which);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
