#pragma once

#include "tlmor/benchmark.hpp"
#include "tlmor/rng.hpp"
#include "tlmor/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tlmor {

/// Correlated Wiener increments dw = sqrt(h) F xi with F F^T = K.
struct NoisePlan {
  Matrix factor;  // q x q
  double h = 0.0;
  Index steps = 0;
  Index q() const { return factor.rows(); }
};
NoisePlan make_noise_plan(const Matrix& K, double T, Index steps);

/// Draws the q x cols increment block for paths first_path .. first_path+cols-1 at `step`.
void wiener_increments(const NoisePlan& plan, const rng::NormalGenerator& gen, std::uint64_t first_path,
                       Index cols, Index step, Matrix& dW);

enum class StepScheme {
  SemiImplicit,      // x+ = (I - hA)^-1 (x + h B u + sum_i N_i x dw_i)
  ExponentialEuler,  // x+ = exp(hA)     (x + h B u + sum_i N_i x dw_i)
};

/// One time step applied to a block of states (one column per path).
class Stepper {
 public:
  Stepper(const StochasticLinearSystem& sys, double h, StepScheme scheme = StepScheme::SemiImplicit);
  /// X <- propagator * (X + drift 1^T + sum_i N_i X diag(dW(i, :))). `drift` may be empty.
  void step(Matrix& X, const Vector& drift, const Matrix& dW);
  bool diagonal() const { return diagonal_; }
  const StochasticLinearSystem& system() const { return sys_; }

 private:
  StochasticLinearSystem sys_;
  bool diagonal_ = false;
  bool noisy_ = false;
  Vector scale_;     // diagonal propagator
  Matrix prop_;      // dense propagator
  std::vector<Matrix> work_;
  Matrix combined_;
  Vector zero_drift_;
};

struct SimulationConfig {
  Index steps = 1000;
  Index paths = 1000;
  std::uint64_t seed = 20240601;
  Index block = 256;  // paths advanced together; fixed so results do not depend on threads
  int threads = 1;
};

/// Pathwise output error E||y(t) - y_r(t)||_2 on the grid t_k = k T / steps.
struct OutputErrorEstimate {
  Vector time;
  Vector mean;
  Vector stderr_;
  double sup_error = 0.0;
  double sup_stderr = 0.0;  // standard error at the maximizing time
  Index argmax = 0;
  Index paths = 0;
  Index steps = 0;
};

/// Simulates the full model once per path and every reduced model on the same
/// increments. Returns one estimate per reduced model.
std::vector<OutputErrorEstimate> simulate_output_errors(const StochasticLinearSystem& full,
                                                        const std::vector<StochasticLinearSystem>& roms,
                                                        const ControlSignal& u, double T,
                                                        const SimulationConfig& cfg);

OutputErrorEstimate simulate_pair(const StochasticLinearSystem& full, const StochasticLinearSystem& rom,
                                  const ControlSignal& u, double T, const SimulationConfig& cfg);

/// Outputs of one system along paths [0, paths) at the final time, p x paths.
Matrix simulate_terminal_outputs(const StochasticLinearSystem& sys, const ControlSignal& u, double T,
                                 const SimulationConfig& cfg);

/// One path of the matrix-valued homogeneous equation dX = A X dt + sum N_i X dw_i.
Matrix simulate_matrix_state(const StochasticLinearSystem& sys, const Matrix& X0, double T, Index steps,
                             std::uint64_t seed, std::uint64_t path,
                             StepScheme scheme = StepScheme::SemiImplicit,
                             rng::Stream stream = rng::Stream::Simulation);

/// CSV with columns t, mean_err, stderr.
void write_error_profile(std::ostream& os, const OutputErrorEstimate& est);

}  // namespace tlmor
