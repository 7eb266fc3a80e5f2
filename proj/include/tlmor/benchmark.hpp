#pragma once

#include "tlmor/system.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace tlmor {

/// Spectral Galerkin discretization of the controlled stochastic heat
/// equation on [0, pi]^2 with Dirichlet boundary:
///
///   dX = (alpha Lap + beta) X dt + 1_{[pi/4,3pi/4]^2} u dt
///        + gamma exp(-|z1 - pi/2| - z2) X dw.
struct BenchmarkConfig {
  double alpha = 0.4;
  double beta = 3.0;
  double gamma = 2.0;
  Index n = 100;
  double T = 1.0;
  int q = 1;
  double rho = 0.0;

  void validate() const;
};

/// Laplacian mode (k1, k2) with eigenvalue k1^2 + k2^2.
struct LaplacianMode {
  int k1;
  int k2;
  int lambda() const { return k1 * k1 + k2 * k2; }
};

/// First n modes in ascending eigenvalue order, ties broken lexicographically.
std::vector<LaplacianMode> ordered_laplacian_modes(Index n);

/// Weighted sine product integrals used for the noise matrix:
///   kernel x: int_0^pi exp(-|s - pi/2|) sin(a s) sin(b s) ds
///   kernel y: int_0^pi exp(-s) sin(a s) sin(b s) ds
/// evaluated by adaptive Gauss-Kronrod quadrature (absolute tolerance 1e-12).
double noise_kernel_x(int a, int b);
double noise_kernel_y(int a, int b);

StochasticLinearSystem build_heat_spde_benchmark(const BenchmarkConfig& cfg);

/// Deterministic control u : [0, T] -> R^m.
struct ControlSignal {
  Index m = 1;
  double c_u = 1.0;
  std::function<Vector(double)> eval;

  Vector operator()(double t) const { return eval(t); }
};

/// u(t) = c_u exp(-0.1 t) normalized to unit L2 norm on [0, T].
ControlSignal benchmark_control(double T);

/// Real power X^p of a symmetric positive semidefinite matrix; eigenvalues in
/// [-tol*max|mu|, 0) are clamped to zero, more negative ones raise an Error.
Matrix symmetric_power(const Matrix& X, double p, double tol = 1e-10);

}  // namespace tlmor
