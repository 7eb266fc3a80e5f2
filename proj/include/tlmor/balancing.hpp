#pragma once

#include "tlmor/system.hpp"

#include <vector>

namespace tlmor {

enum class TransformKind { Modal, Balanced };

/// Change of basis x_S = S x that diagonalizes the reachability Gramian
/// (modal) or both Gramians (balanced). `sigma` holds the diagonal of
/// S P S^T in nonincreasing order: eigenvalues of P or Hankel singular values.
struct BalancingTransform {
  Matrix S;
  Matrix Sinv;
  Vector sigma;
  TransformKind kind = TransformKind::Balanced;
};

/// Eigenbasis of P: rows of S are eigenvectors, S^-1 = S^T.
BalancingTransform modal_transform(const Matrix& P);

/// Square-root balancing. Factors of P and Q come from symmetric
/// eigendecompositions whose eigenvalues are floored at `reg * lambda_max`.
BalancingTransform balanced_transform(const Matrix& P, const Matrix& Q, double reg = 1e-12);

/// Truncated model together with every block of the partitioned realization
/// (A_S, B_S, C_S, N_{i,S}); the off-diagonal blocks feed the error bound.
struct ReducedSystem {
  Index r = 0;
  Matrix A11, B1, C1;
  std::vector<Matrix> N11;
  Matrix K;
  Matrix V;  // n x r, first r columns of S^-1
  Matrix W;  // n x r, first r rows of S, transposed

  Matrix A12, A21, A22, B2, C2;
  std::vector<Matrix> N12, N21, N22;
  Vector sigma1, sigma2;
  StochasticLinearSystem transformed;  // full realization in the new basis

  StochasticLinearSystem as_system() const;
};

ReducedSystem truncate(const StochasticLinearSystem& sys, const BalancingTransform& tr, Index r);

/// Smallest r >= 1 with sigma_{r+1} <= tol * sigma_1; n when no such r exists.
Index suggest_order(const Vector& sigma, double tol);

}  // namespace tlmor
