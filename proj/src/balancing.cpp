#include "tlmor/balancing.hpp"

#include "tlmor/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tlmor {

namespace {

// Returns F with F F^T = X after flooring the spectrum at reg * lambda_max.
Matrix floored_factor(const Matrix& X, double reg, const char* name) {
  SymmetricEigen es = sorted_symmetric_eigen(X);
  const double top = es.values(0);
  if (!(top > 0.0)) throw SingularError(std::string("balanced_transform: Gramian ") + name + " is zero");
  const double floor = reg * top;
  Vector root(es.values.size());
  for (Index i = 0; i < root.size(); ++i) root(i) = std::sqrt(std::max(es.values(i), floor));
  return es.vectors * root.asDiagonal();
}

}  // namespace

BalancingTransform modal_transform(const Matrix& P) {
  SymmetricEigen es = sorted_symmetric_eigen(P);
  BalancingTransform tr;
  tr.kind = TransformKind::Modal;
  tr.S = es.vectors.transpose();
  tr.Sinv = es.vectors;
  tr.sigma = es.values.cwiseMax(0.0);
  return tr;
}

BalancingTransform balanced_transform(const Matrix& P, const Matrix& Q, double reg) {
  const Index n = P.rows();
  if (P.cols() != n || Q.rows() != n || Q.cols() != n) throw DimensionError("balanced_transform: shape mismatch");
  const Matrix K = floored_factor(P, reg, "P");
  const Matrix L = floored_factor(Q, reg, "Q");
  Eigen::JacobiSVD<Matrix> svd(K.transpose() * L, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // K^T L = V Sigma U^T in the naming of the factorization.
  Matrix V = svd.matrixU();
  Matrix U = svd.matrixV();
  const Vector sigma = svd.singularValues();
  for (Index j = 0; j < n; ++j) {
    Index imax = 0;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0) {
      V.col(j) *= -1.0;
      U.col(j) *= -1.0;
    }
  }
  const double smax = sigma(0);
  const double threshold = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * smax;
  Index rank = 0;
  while (rank < n && sigma(rank) > threshold) ++rank;
  if (rank < n) {
    std::ostringstream os;
    os << "balanced_transform: product of Gramian factors is rank deficient (numerical rank " << rank << " of "
       << n << ", gap " << n - rank << ")";
    throw SingularError(os.str());
  }
  const Vector isqrt = sigma.cwiseSqrt().cwiseInverse();
  BalancingTransform tr;
  tr.kind = TransformKind::Balanced;
  tr.S = isqrt.asDiagonal() * U.transpose() * L.transpose();
  tr.Sinv = K * V * isqrt.asDiagonal();
  tr.sigma = sigma;
  return tr;
}

StochasticLinearSystem ReducedSystem::as_system() const {
  StochasticLinearSystem s;
  s.A = A11;
  s.B = B1;
  s.C = C1;
  s.N = N11;
  s.K = K;
  return s;
}

ReducedSystem truncate(const StochasticLinearSystem& sys, const BalancingTransform& tr, Index r) {
  const Index n = sys.n();
  if (r < 1 || r > n) throw DimensionError("truncate: r must lie in [1, n]");
  if (tr.S.rows() != n || tr.Sinv.rows() != n) throw DimensionError("truncate: transform does not match system");
  const Index k = n - r;
  ReducedSystem rom;
  rom.r = r;
  rom.transformed = sys.transformed(tr.S, tr.Sinv);
  const StochasticLinearSystem& T = rom.transformed;
  rom.V = tr.Sinv.leftCols(r);
  rom.W = tr.S.topRows(r).transpose();
  rom.A11 = T.A.topLeftCorner(r, r);
  rom.A12 = T.A.topRightCorner(r, k);
  rom.A21 = T.A.bottomLeftCorner(k, r);
  rom.A22 = T.A.bottomRightCorner(k, k);
  rom.B1 = T.B.topRows(r);
  rom.B2 = T.B.bottomRows(k);
  rom.C1 = T.C.leftCols(r);
  rom.C2 = T.C.rightCols(k);
  for (const Matrix& Ni : T.N) {
    rom.N11.push_back(Ni.topLeftCorner(r, r));
    rom.N12.push_back(Ni.topRightCorner(r, k));
    rom.N21.push_back(Ni.bottomLeftCorner(k, r));
    rom.N22.push_back(Ni.bottomRightCorner(k, k));
  }
  rom.K = sys.K;
  rom.sigma1 = tr.sigma.head(r);
  rom.sigma2 = tr.sigma.tail(k);
  return rom;
}

Index suggest_order(const Vector& sigma, double tol) {
  if (!(tol > 0.0)) throw Error("suggest_order: tol must be positive");
  const Index n = sigma.size();
  if (n == 0) throw DimensionError("suggest_order: empty spectrum");
  for (Index r = 1; r < n; ++r)
    if (sigma(r) <= tol * sigma(0)) return r;
  return n;
}

}  // namespace tlmor
