#include "tlmor/pipeline.hpp"

#include "tlmor/covflow.hpp"
#include "tlmor/matrix_io.hpp"
#include "tlmor/rng.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tlmor {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw Error("config: " + key + " expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw Error("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw Error("config: " + key + " expects an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw Error("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw Error("config: " + key + " expects a boolean, got '" + v + "'");
}

template <class F>
auto stage(const char* name, std::ostream* log, F&& f) -> decltype(f()) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      if (log) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        *log << "[" << name << "] " << dt.count() << " s\n";
      }
    } else {
      auto out = f();
      if (log) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        *log << "[" << name << "] " << dt.count() << " s\n";
      }
      return out;
    }
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + name + " failed: " + e.what());
  }
}

BalancingTransform make_transform(const GramianSet& g, TransformKind kind) {
  return kind == TransformKind::Modal ? modal_transform(g.P) : balanced_transform(g.P, g.Q);
}

std::string fmt_value(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

const char* to_string(GramianStrategy s) {
  switch (s) {
    case GramianStrategy::Exact: return "exact";
    case GramianStrategy::Sampled: return "sampled";
    case GramianStrategy::Approx: return "approx";
  }
  return "?";
}

GramianStrategy parse_strategy(const std::string& s) {
  if (s == "exact") return GramianStrategy::Exact;
  if (s == "sampled") return GramianStrategy::Sampled;
  if (s == "approx") return GramianStrategy::Approx;
  throw Error("unknown Gramian strategy '" + s + "' (expected exact, sampled or approx)");
}

std::vector<Index> parse_orders(const std::string& s) {
  std::vector<Index> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    const auto dash = tok.find('-');
    if (dash != std::string::npos && dash > 0) {
      const long long a = to_integer("orders", trim(tok.substr(0, dash)));
      const long long b = to_integer("orders", trim(tok.substr(dash + 1)));
      if (b < a) throw Error("config: bad order range '" + tok + "'");
      for (long long r = a; r <= b; ++r) out.push_back(static_cast<Index>(r));
    } else {
      out.push_back(static_cast<Index>(to_integer("orders", tok)));
    }
  }
  if (out.empty()) throw Error("config: orders list is empty");
  return out;
}

void ExperimentConfig::validate() const {
  bench.validate();
  estimator_config().validate();
  if (!std::isfinite(c_F) || !std::isfinite(c_G)) throw Error("config: c_F and c_G must be finite");
  for (Index r : orders)
    if (r < 1 || r > bench.n) throw Error("config: reduced order " + std::to_string(r) + " outside [1, n]");
  if (paths < 2) throw Error("config: paths must be at least 2");
  if (steps < 1) throw Error("config: steps must be positive");
  if (threads < 1) throw Error("config: threads must be positive");
}

EstimatorConfig ExperimentConfig::estimator_config() const {
  EstimatorConfig e;
  e.M = M;
  e.n_g = n_g;
  e.c = c;
  e.include_ito_correction = include_ito_correction;
  e.seed = rng::splitmix64(seed ^ 0x6772616d69616e73ull);
  return e;
}

SimulationConfig ExperimentConfig::simulation_config(double T) const {
  SimulationConfig s;
  s.paths = paths;
  s.steps = std::max<Index>(1, static_cast<Index>(std::llround(static_cast<double>(steps) * T)));
  s.threads = threads;
  s.seed = rng::splitmix64(seed ^ 0x6d6f6e746563726full);
  return s;
}

LyapunovSolveOptions ExperimentConfig::lyapunov_options() const {
  LyapunovSolveOptions o;
  o.strategy = lyapunov;
  o.direct_cap_n = std::max<Index>(100, o.direct_cap_n);
  return o;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& v) {
  if (key == "alpha") cfg.bench.alpha = to_double(key, v);
  else if (key == "beta") cfg.bench.beta = to_double(key, v);
  else if (key == "gamma") cfg.bench.gamma = to_double(key, v);
  else if (key == "n") cfg.bench.n = static_cast<Index>(to_integer(key, v));
  else if (key == "T") cfg.bench.T = to_double(key, v);
  else if (key == "q") cfg.bench.q = static_cast<int>(to_integer(key, v));
  else if (key == "rho") cfg.bench.rho = to_double(key, v);
  else if (key == "strategy") cfg.strategy = parse_strategy(v);
  else if (key == "M") cfg.M = static_cast<Index>(to_integer(key, v));
  else if (key == "n_g") cfg.n_g = static_cast<Index>(to_integer(key, v));
  else if (key == "c") cfg.c = to_double(key, v);
  else if (key == "ito_correction") cfg.include_ito_correction = to_bool(key, v);
  else if (key == "c_F") cfg.c_F = to_double(key, v);
  else if (key == "c_G") cfg.c_G = to_double(key, v);
  else if (key == "transform") {
    if (v == "balanced") cfg.transform = TransformKind::Balanced;
    else if (v == "modal") cfg.transform = TransformKind::Modal;
    else throw Error("config: transform must be balanced or modal");
  } else if (key == "orders") cfg.orders = parse_orders(v);
  else if (key == "paths") cfg.paths = static_cast<Index>(to_integer(key, v));
  else if (key == "steps") cfg.steps = static_cast<Index>(to_integer(key, v));
  else if (key == "threads") cfg.threads = static_cast<int>(to_integer(key, v));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(v));
  else if (key == "lyapunov") {
    if (v == "direct") cfg.lyapunov = LyapunovStrategy::Direct;
    else if (v == "iterative") cfg.lyapunov = LyapunovStrategy::Iterative;
    else throw Error("config: lyapunov must be direct or iterative");
  } else if (key == "out_dir") cfg.out_dir = v;
  else throw Error("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& is, const std::string& origin) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return parse_config(in, path);
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const auto d = [](double x) { return io::format_double(x); };
  os << "alpha = " << d(cfg.bench.alpha) << "\n"
     << "beta = " << d(cfg.bench.beta) << "\n"
     << "gamma = " << d(cfg.bench.gamma) << "\n"
     << "n = " << cfg.bench.n << "\n"
     << "T = " << d(cfg.bench.T) << "\n"
     << "q = " << cfg.bench.q << "\n"
     << "rho = " << d(cfg.bench.rho) << "\n"
     << "strategy = " << to_string(cfg.strategy) << "\n"
     << "M = " << cfg.M << "\n"
     << "n_g = " << cfg.n_g << "\n"
     << "c = " << d(cfg.c) << "\n"
     << "ito_correction = " << (cfg.include_ito_correction ? "true" : "false") << "\n"
     << "c_F = " << d(cfg.c_F) << "\n"
     << "c_G = " << d(cfg.c_G) << "\n"
     << "transform = " << (cfg.transform == TransformKind::Modal ? "modal" : "balanced") << "\n"
     << "orders = ";
  for (std::size_t i = 0; i < cfg.orders.size(); ++i) os << (i ? "," : "") << cfg.orders[i];
  os << "\n"
     << "paths = " << cfg.paths << "\n"
     << "steps = " << cfg.steps << "\n"
     << "threads = " << cfg.threads << "\n"
     << "seed = " << cfg.seed << "\n"
     << "lyapunov = " << (cfg.lyapunov == LyapunovStrategy::Direct ? "direct" : "iterative") << "\n"
     << "out_dir = " << cfg.out_dir << "\n";
  return os.str();
}

CaseResult run_case(const ExperimentConfig& cfg, const CaseOptions& opts, std::ostream* log) {
  cfg.validate();
  const double T = cfg.bench.T;
  CaseResult res;
  res.sys = stage("benchmark", log, [&] { return build_heat_spde_benchmark(cfg.bench); });
  const ControlSignal u = benchmark_control(T);
  res.u_norm = u.c_u * std::sqrt(-std::expm1(-0.2 * T) / 0.2);
  const LyapunovSolveOptions lyap = cfg.lyapunov_options();

  bool need_exact = opts.bound;
  for (GramianStrategy s : opts.strategies) need_exact = need_exact || s == GramianStrategy::Exact;
  if (need_exact) {
    try {
      res.exact = stage("gramians/exact", log, [&] { return exact_gramians(res.sys, T, lyap); });
    } catch (const Error& e) {
      bool required = false;
      for (GramianStrategy s : opts.strategies) required = required || s == GramianStrategy::Exact;
      if (required) throw;
      if (log) *log << "exact Gramians unavailable, bounds skipped: " << e.what() << "\n";
    }
  }

  std::vector<StochasticLinearSystem> rom_systems;
  std::vector<ReducedSystem> roms;
  for (GramianStrategy s : opts.strategies) {
    GramianSet g;
    if (s == GramianStrategy::Exact) {
      g = *res.exact;
    } else if (s == GramianStrategy::Sampled) {
      g = stage("gramians/sampled", log, [&] { return sampled_gramians(res.sys, T, cfg.estimator_config(), lyap); });
    } else {
      g = stage("gramians/approx", log, [&] { return approx_gramians(res.sys, T, cfg.approx_config(), lyap); });
    }
    BalancingTransform tr = stage("transform", log, [&] { return make_transform(g, cfg.transform); });
    for (Index r : cfg.orders) {
      ReducedSystem rom = stage("truncate", nullptr, [&] { return truncate(res.sys, tr, r); });
      ResultRow row;
      row.strategy = s;
      row.T = T;
      row.rho = cfg.bench.rho;
      row.r = r;
      if (opts.bound && res.exact) {
        row.bound = stage("bound", nullptr, [&] {
          const CoupledCovariance coupled = terminal_coupled(res.sys, rom, T);
          ErrorBoundReport rep = aposteriori_bound(res.sys, rom, res.exact->P, coupled, res.u_norm);
          if (s == GramianStrategy::Exact) rep = hsv_representation(res.sys, rom, tr, res.exact->F_T, coupled, rep);
          return rep;
        });
      }
      rom_systems.push_back(rom.as_system());
      roms.push_back(std::move(rom));
      res.rows.push_back(row);
    }
    res.gramians.emplace_back(s, std::move(g));
    res.transforms.emplace_back(s, std::move(tr));
  }
  if (log && opts.bound && res.exact) *log << "[bound] " << res.rows.size() << " reduced models\n";

  if (opts.simulate) {
    res.profiles = stage("simulate", log, [&] {
      return simulate_output_errors(res.sys, rom_systems, u, T, cfg.simulation_config(T));
    });
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      res.rows[i].mc_error = res.profiles[i].sup_error;
      res.rows[i].mc_stderr = res.profiles[i].sup_stderr;
    }
  }
  return res;
}

std::vector<ResultRow> experiment_table1(const ExperimentConfig& cfg, std::ostream* log) {
  CaseOptions o;
  o.strategies = {GramianStrategy::Exact, GramianStrategy::Sampled, GramianStrategy::Approx};
  return run_case(cfg, o, log).rows;
}

std::vector<ResultRow> experiment_table2(const ExperimentConfig& cfg_in, std::ostream* log) {
  ExperimentConfig cfg = cfg_in;
  cfg.bench.n = 1000;
  CaseOptions o;
  o.strategies = {GramianStrategy::Sampled, GramianStrategy::Approx};
  o.bound = false;
  return run_case(cfg, o, log).rows;
}

std::vector<ResultRow> experiment_table3(const ExperimentConfig& cfg_in, const std::vector<double>& horizons,
                                         std::ostream* log) {
  std::vector<ResultRow> rows;
  for (double T : horizons) {
    ExperimentConfig cfg = cfg_in;
    cfg.bench.T = T;
    CaseOptions o;
    o.strategies = {GramianStrategy::Exact};
    if (log) *log << "T = " << T << "\n";
    for (auto& r : run_case(cfg, o, log).rows) rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> experiment_table4(const ExperimentConfig& cfg_in, const std::vector<double>& rhos,
                                         std::ostream* log) {
  std::vector<ResultRow> rows;
  for (double rho : rhos) {
    ExperimentConfig cfg = cfg_in;
    cfg.bench.q = 2;
    cfg.bench.rho = rho;
    CaseOptions o;
    o.strategies = {GramianStrategy::Exact};
    if (log) *log << "rho = " << rho << "\n";
    for (auto& r : run_case(cfg, o, log).rows) rows.push_back(r);
  }
  return rows;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  io::CsvWriter csv(os, {"strategy", "T", "rho", "r", "mc_error", "mc_stderr", "eps_bound", "term_hsv",
                         "term_cov_cross", "term_cov_diag", "agreement_residual"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const ResultRow& r : rows) {
    csv.cell(std::string(to_string(r.strategy))).cell(r.T).cell(r.rho).cell(r.r).cell(r.mc_error).cell(r.mc_stderr);
    const bool hsv = r.bound && r.bound->has_hsv_terms;
    csv.cell(r.bound ? r.bound->bound : nan)
        .cell(hsv ? r.bound->term_hsv : nan)
        .cell(hsv ? r.bound->term_cov_cross : nan)
        .cell(hsv ? r.bound->term_cov_diag : nan)
        .cell(hsv ? r.bound->agreement_residual : nan);
    csv.end_row();
  }
}

void write_hsv_csv(std::ostream& os, const Vector& sigma) {
  io::CsvWriter csv(os, {"index", "sigma", "log10_sigma"});
  for (Index i = 0; i < sigma.size(); ++i) {
    csv.cell(i + 1).cell(sigma(i)).cell(std::log10(sigma(i)));
    csv.end_row();
  }
}

void write_bound_plot_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  io::CsvWriter csv(os, {"r", "log10_error", "log10_bound"});
  for (const ResultRow& r : rows) {
    csv.cell(r.r).cell(std::log10(r.mc_error));
    csv.cell(r.bound ? std::log10(r.bound->bound) : std::numeric_limits<double>::quiet_NaN());
    csv.end_row();
  }
}

void write_grid_csv(std::ostream& os, const std::vector<ResultRow>& rows, const std::string& column_key) {
  const auto column_of = [&](const ResultRow& r) -> std::string {
    if (column_key == "strategy") return to_string(r.strategy);
    if (column_key == "T") return "T=" + fmt_value(r.T);
    if (column_key == "rho") return "rho=" + fmt_value(r.rho);
    throw Error("write_grid_csv: unknown column key " + column_key);
  };
  std::vector<std::string> columns;
  std::vector<Index> orders;
  for (const ResultRow& r : rows) {
    const std::string c = column_of(r);
    if (std::find(columns.begin(), columns.end(), c) == columns.end()) columns.push_back(c);
    if (std::find(orders.begin(), orders.end(), r.r) == orders.end()) orders.push_back(r.r);
  }
  std::vector<std::string> header{"r"};
  header.insert(header.end(), columns.begin(), columns.end());
  io::CsvWriter csv(os, header);
  for (Index r : orders) {
    csv.cell(r);
    for (const std::string& c : columns) {
      double v = std::numeric_limits<double>::quiet_NaN();
      for (const ResultRow& row : rows)
        if (row.r == r && column_of(row) == c) v = row.mc_error;
      csv.cell(v);
    }
    csv.end_row();
  }
}

void write_rom(std::ostream& os, const ReducedSystem& rom) {
  os << "STOCHROM " << rom.r << " " << rom.V.rows() << " " << rom.B1.cols() << " " << rom.C1.rows() << " "
     << rom.N11.size() << "\n";
  io::write_matrix(os, "A11", rom.A11);
  io::write_matrix(os, "B1", rom.B1);
  io::write_matrix(os, "C1", rom.C1);
  for (std::size_t i = 0; i < rom.N11.size(); ++i) io::write_matrix(os, "N11_" + std::to_string(i + 1), rom.N11[i]);
  io::write_matrix(os, "K", rom.K);
  io::write_matrix(os, "V", rom.V);
  io::write_matrix(os, "W", rom.W);
}

}  // namespace tlmor
