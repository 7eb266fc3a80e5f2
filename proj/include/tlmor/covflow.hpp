#pragma once

#include "tlmor/balancing.hpp"
#include "tlmor/lyapunov.hpp"

namespace tlmor {

struct ExpmActionOptions {
  double agreement_tol = 1e-8;  // relative, between consecutive refinements
  int max_refinements = 10;
  int max_terms = 60;
};

/// exp(t op)(X0) for a Sylvester-type operator, by a truncated Taylor series
/// on sub-steps. The sub-step count starts at ceil(t * ||op||) and doubles
/// until two consecutive results agree.
Matrix expm_action(const SylvesterOperator& op, const Matrix& X0, double t, const ExpmActionOptions& opts = {});

/// Same for a generalized Lyapunov operator; symmetric X0 gives a symmetric result.
Matrix expm_action(const GeneralizedLyapunovOperator& op, const Matrix& X0, double t,
                   const ExpmActionOptions& opts = {});

/// Reference route through the dense matrix exponential of the Kronecker
/// matrix. Only meant for small operators.
Matrix expm_action_dense(const SylvesterOperator& op, const Matrix& X0, double t);

/// F(T) = E[x_B(T) x_B(T)^T] with F(0) = B B^T, B column-wise initial states.
Matrix terminal_F(const StochasticLinearSystem& sys, double T);
/// G(T), the same quantity for the dual system.
Matrix terminal_G(const StochasticLinearSystem& sys, double T);

/// Terminal values of the flows coupling a model with its reduction:
///   barF' = A11 barF + barF A11^T + sum k_ij N_{i,11} barF N_{j,11}^T,  barF(0) = B1 B1^T
///   tildeF' = A tildeF + tildeF A11^T + sum k_ij N_i tildeF N_{j,11}^T, tildeF(0) = B B1^T
struct CoupledCovariance {
  Matrix barF;    // r x r
  Matrix tildeF;  // n x r
};
CoupledCovariance terminal_coupled(const StochasticLinearSystem& sys, const ReducedSystem& rom, double T);

}  // namespace tlmor
