#pragma once

#include "tlmor/system.hpp"

#include <optional>
#include <vector>

namespace tlmor {

/// Linear map on n1 x n2 matrices
///
///   X -> A1 X + X A2^T + sum_{i,j} k_ij N1_i X N2_j^T.
///
/// Every matrix equation in the library is an instance: the generalized
/// Lyapunov operators (A1 = A2, N1 = N2), the coupled covariance flows of the
/// error bound and the Sylvester-type equations for the cross Gramians.
class SylvesterOperator {
 public:
  SylvesterOperator(Matrix A1, Matrix A2, std::vector<Matrix> N1, std::vector<Matrix> N2, Matrix K);

  Index rows() const { return A1_.rows(); }
  Index cols() const { return A2_.rows(); }

  Matrix apply(const Matrix& X) const;

  /// Dense (n1 n2) x (n1 n2) matrix with kronecker() * vec(X) == vec(apply(X)).
  Matrix kronecker() const;

  /// Solves apply(X) = L through an LU factorization of kronecker().
  /// `what` names the equation in error messages.
  Matrix solve_vectorized(const Matrix& L, const std::string& what) const;

  /// Rough norm estimate by power iteration on apply().
  double norm_estimate(int iterations = 30) const;

  const Matrix& A1() const { return A1_; }
  const Matrix& A2() const { return A2_; }
  const std::vector<Matrix>& N1() const { return N1_; }
  const std::vector<Matrix>& N2() const { return N2_; }
  const Matrix& K() const { return K_; }

 private:
  Matrix A1_, A2_;
  std::vector<Matrix> N1_, N2_;
  Matrix K_;
  std::vector<Matrix> N2K_;  // sum_j k_ij N2_j, one per i
};

enum class LyapunovMode { Primal, Adjoint };

/// L_A + Pi (primal) or L_A^* + Pi^* (adjoint) for a given system.
class GeneralizedLyapunovOperator {
 public:
  GeneralizedLyapunovOperator(const StochasticLinearSystem& sys, LyapunovMode mode);

  Matrix apply(const Matrix& X) const { return op_.apply(X); }
  Index dim() const { return op_.rows(); }
  LyapunovMode mode() const { return mode_; }

  /// Only the noise part Pi (or Pi^*).
  Matrix apply_noise(const Matrix& X) const;

  /// Coefficient matrix acting from the left (A for primal, A^T for adjoint).
  const Matrix& drift() const { return op_.A1(); }
  const SylvesterOperator& as_sylvester() const { return op_; }

 private:
  LyapunovMode mode_;
  SylvesterOperator op_;
};

inline constexpr Index kDefaultKroneckerCap = 10000;

/// Dense Kronecker matrix A (x) I + I (x) A + sum k_ij N_i (x) N_j of the primal
/// operator. Throws when n^2 exceeds `cap`.
Matrix kronecker_matrix(const StochasticLinearSystem& sys, Index cap = kDefaultKroneckerCap);

enum class LyapunovStrategy { Direct, Iterative };

struct LyapunovSolveOptions {
  LyapunovStrategy strategy = LyapunovStrategy::Direct;
  Index direct_cap_n = 100;  // direct strategy needs n <= cap
  int max_iter = 500;
  double rel_tol = 1e-8;
  /// Iterative splitting solves L_{A - mu I}(X_{k+1}) = L - Pi(X_k) + 2 mu X_k.
  /// Without a value, mu = 0 is tried first and a stabilizing shift is used
  /// when L_A is singular.
  std::optional<double> shift;
};

struct LyapunovSolveResult {
  Matrix X;
  double residual = 0.0;          // ||op(X) - L||_F
  std::vector<double> history;    // iterative residuals
  int iterations = 0;
  double shift = 0.0;
};

/// Solves op(X) = L for symmetric L. The result is symmetrized and satisfies
/// ||op(X) - L||_F <= rel_tol * max(1, ||L||_F).
LyapunovSolveResult solve_generalized(const GeneralizedLyapunovOperator& op, const Matrix& L,
                                      const LyapunovSolveOptions& opts = {});

/// Bartels-Stewart solver for A X + X A^T = RHS. The real Schur form of A is
/// computed once and reused across right-hand sides.
class StandardLyapunovSolver {
 public:
  explicit StandardLyapunovSolver(const Matrix& A);
  Matrix solve(const Matrix& RHS) const;
  /// min |lambda_i + lambda_j| over the spectrum of A.
  double min_eigen_sum() const { return min_sum_; }

 private:
  Matrix U_, T_;
  std::vector<std::pair<Index, Index>> blocks_;  // (start, size) of the quasi-triangular T
  double min_sum_ = 0.0;
};

Matrix solve_standard_lyapunov(const Matrix& A, const Matrix& RHS);

}  // namespace tlmor
