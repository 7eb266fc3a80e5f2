#pragma once

#include "tlmor/types.hpp"

#include <vector>

namespace tlmor {

/// Controlled linear SDE with multiplicative noise
///
///   dx = (A x + B u) dt + sum_i N_i x dw_i,   y = C x,
///
/// where w is a q-dimensional Wiener process with E[w w^T] = K t.
struct StochasticLinearSystem {
  Matrix A;
  Matrix B;
  Matrix C;
  std::vector<Matrix> N;
  Matrix K;

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }
  Index q() const { return static_cast<Index>(N.size()); }

  /// Throws DimensionError / Error when dimensions are inconsistent, entries
  /// are non-finite, or K is not symmetric positive semidefinite.
  void validate() const;

  /// Coefficients (A^T, C^T, B^T, N_i^T). Its reachability quantities are the
  /// observability quantities of *this.
  StochasticLinearSystem dual() const;

  /// State-space change x_S = S x: (S A S^-1, S B, C S^-1, S N_i S^-1).
  StochasticLinearSystem transformed(const Matrix& S, const Matrix& Sinv) const;

  bool deterministic() const;
};

/// Single-input single-output scalar system with one noise channel.
StochasticLinearSystem scalar_system(double a, double b, double c, double nu);

}  // namespace tlmor
