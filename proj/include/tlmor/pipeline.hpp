#pragma once

#include "tlmor/balancing.hpp"
#include "tlmor/benchmark.hpp"
#include "tlmor/error_bound.hpp"
#include "tlmor/gramians.hpp"
#include "tlmor/mcsim.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tlmor {

enum class GramianStrategy { Exact, Sampled, Approx };
const char* to_string(GramianStrategy s);
GramianStrategy parse_strategy(const std::string& s);

/// Everything a batch run needs. Stage seeds are derived from `seed`.
struct ExperimentConfig {
  BenchmarkConfig bench;
  GramianStrategy strategy = GramianStrategy::Exact;
  Index M = 10;
  Index n_g = 1000;
  double c = 0.0;
  bool include_ito_correction = false;
  double c_F = 0.0;
  double c_G = 0.0;
  TransformKind transform = TransformKind::Balanced;
  std::vector<Index> orders{2, 4, 8, 16};
  Index paths = 10000;
  Index steps = 1000;  // per unit time
  int threads = 1;
  std::uint64_t seed = 20240601;
  LyapunovStrategy lyapunov = LyapunovStrategy::Direct;
  std::string out_dir = "out";

  void validate() const;
  EstimatorConfig estimator_config() const;
  ApproxConfig approx_config() const { return {c_F, c_G}; }
  SimulationConfig simulation_config(double T) const;
  LyapunovSolveOptions lyapunov_options() const;
};

/// Flat `key = value` lines, `#` starts a comment.
ExperimentConfig parse_config(std::istream& is, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string render_config(const ExperimentConfig& cfg);

std::vector<Index> parse_orders(const std::string& s);

/// One reduced model evaluated by simulation and, when the exact reachability
/// Gramian is available, by the a-posteriori bound.
struct ResultRow {
  GramianStrategy strategy = GramianStrategy::Exact;
  double T = 1.0;
  double rho = 0.0;
  Index r = 0;
  double mc_error = 0.0;
  double mc_stderr = 0.0;
  std::optional<ErrorBoundReport> bound;
};

struct CaseResult {
  StochasticLinearSystem sys;
  double u_norm = 1.0;
  std::optional<GramianSet> exact;
  std::vector<std::pair<GramianStrategy, GramianSet>> gramians;
  std::vector<std::pair<GramianStrategy, BalancingTransform>> transforms;
  std::vector<ResultRow> rows;
  std::vector<OutputErrorEstimate> profiles;  // aligned with rows
};

struct CaseOptions {
  std::vector<GramianStrategy> strategies;
  bool simulate = true;
  bool bound = true;
};

/// Benchmark -> Gramians -> transform -> truncation -> bound -> simulation for
/// one benchmark configuration. All reduced models share one simulation run.
CaseResult run_case(const ExperimentConfig& cfg, const CaseOptions& opts, std::ostream* log = nullptr);

/// Row sets of the figure and table experiments.
std::vector<ResultRow> experiment_table1(const ExperimentConfig& cfg, std::ostream* log = nullptr);
std::vector<ResultRow> experiment_table2(const ExperimentConfig& cfg, std::ostream* log = nullptr);
std::vector<ResultRow> experiment_table3(const ExperimentConfig& cfg, const std::vector<double>& horizons,
                                         std::ostream* log = nullptr);
std::vector<ResultRow> experiment_table4(const ExperimentConfig& cfg, const std::vector<double>& rhos,
                                         std::ostream* log = nullptr);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// Figure 1 plot data: index, sigma, log10 sigma.
void write_hsv_csv(std::ostream& os, const Vector& sigma);
/// Figure 2 plot data: r, log10 error, log10 bound.
void write_bound_plot_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// Grid with one row per r and one column per value of `column_key`.
void write_grid_csv(std::ostream& os, const std::vector<ResultRow>& rows, const std::string& column_key);

/// STOCHROM file: header `STOCHROM r n m p q`, then A11, B1, C1, N11_i, K, V, W.
void write_rom(std::ostream& os, const ReducedSystem& rom);

}  // namespace tlmor
