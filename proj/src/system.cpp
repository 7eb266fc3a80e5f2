#include "tlmor/system.hpp"

#include "tlmor/linalg.hpp"

#include <string>

namespace tlmor {

namespace {

void require_finite(const Matrix& M, const char* name) {
  if (!M.allFinite()) throw Error(std::string("system: non-finite entries in ") + name);
}

}  // namespace

void StochasticLinearSystem::validate() const {
  const Index nn = A.rows();
  if (nn < 1 || A.cols() != nn) throw DimensionError("system: A must be square and non-empty");
  if (B.rows() != nn) throw DimensionError("system: B must have n rows");
  if (C.cols() != nn) throw DimensionError("system: C must have n columns");
  if (K.rows() != q() || K.cols() != q()) throw DimensionError("system: K must be q x q");
  for (const Matrix& Ni : N)
    if (Ni.rows() != nn || Ni.cols() != nn) throw DimensionError("system: every N_i must be n x n");
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C, "C");
  require_finite(K, "K");
  for (const Matrix& Ni : N) require_finite(Ni, "N_i");
  if (q() > 0) {
    const double knorm = K.norm();
    if ((K - K.transpose()).norm() > 1e-12 * std::max(1.0, knorm))
      throw Error("system: K is not symmetric");
    if (min_eigenvalue(K) < -1e-12 * knorm) throw Error("system: K is not positive semidefinite");
  }
}

StochasticLinearSystem StochasticLinearSystem::dual() const {
  StochasticLinearSystem d;
  d.A = A.transpose();
  d.B = C.transpose();
  d.C = B.transpose();
  d.K = K;
  d.N.reserve(N.size());
  for (const Matrix& Ni : N) d.N.push_back(Ni.transpose());
  return d;
}

StochasticLinearSystem StochasticLinearSystem::transformed(const Matrix& S, const Matrix& Sinv) const {
  StochasticLinearSystem t;
  t.A = S * A * Sinv;
  t.B = S * B;
  t.C = C * Sinv;
  t.K = K;
  for (const Matrix& Ni : N) t.N.push_back(S * Ni * Sinv);
  return t;
}

bool StochasticLinearSystem::deterministic() const {
  for (const Matrix& Ni : N)
    if (!Ni.isZero(0.0)) return false;
  return true;
}

StochasticLinearSystem scalar_system(double a, double b, double c, double nu) {
  StochasticLinearSystem s;
  s.A = Matrix::Constant(1, 1, a);
  s.B = Matrix::Constant(1, 1, b);
  s.C = Matrix::Constant(1, 1, c);
  s.N = {Matrix::Constant(1, 1, nu)};
  s.K = Matrix::Identity(1, 1);
  return s;
}

}  // namespace tlmor
