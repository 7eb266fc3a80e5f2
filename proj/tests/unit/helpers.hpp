#pragma once

#include "tlmor/system.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

namespace testutil {

using tlmor::Index;
using tlmor::Matrix;

inline Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = scale * nd(gen);
  return M;
}

inline Matrix random_symmetric(std::mt19937_64& gen, Index n) {
  Matrix M = random_matrix(gen, n, n);
  return 0.5 * (M + M.transpose());
}

inline Matrix random_orthogonal(std::mt19937_64& gen, Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(gen, n, n));
  return qr.householderQ();
}

inline Matrix random_correlation(std::mt19937_64& gen, Index q) {
  Matrix G = random_matrix(gen, q, q);
  Matrix K = G * G.transpose() + 0.1 * Matrix::Identity(q, q);
  const Eigen::VectorXd d = K.diagonal().cwiseSqrt().cwiseInverse();
  return d.asDiagonal() * K * d.asDiagonal();
}

/// Random system with drift spectrum shifted by `shift` and noise of size `noise`.
inline tlmor::StochasticLinearSystem random_system(std::mt19937_64& gen, Index n, Index m, Index p, Index q,
                                                   double shift = -1.0, double noise = 0.3) {
  tlmor::StochasticLinearSystem s;
  s.A = random_matrix(gen, n, n, 1.0 / std::sqrt(static_cast<double>(n))) + shift * Matrix::Identity(n, n);
  s.B = random_matrix(gen, n, m);
  s.C = random_matrix(gen, p, n);
  for (Index i = 0; i < q; ++i) s.N.push_back(random_matrix(gen, n, n, noise / std::sqrt(static_cast<double>(n))));
  s.K = q > 0 ? random_correlation(gen, q) : Matrix(0, 0);
  return s;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

/// Composite Simpson rule with `intervals` (even) subintervals.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

/// Classical RK4 for the matrix ODE X' = f(X).
template <class F>
Matrix rk4(F&& f, Matrix X, double T, int steps) {
  const double h = T / steps;
  for (int k = 0; k < steps; ++k) {
    const Matrix k1 = f(X);
    const Matrix k2 = f(X + 0.5 * h * k1);
    const Matrix k3 = f(X + 0.5 * h * k2);
    const Matrix k4 = f(X + h * k3);
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return X;
}

}  // namespace testutil
