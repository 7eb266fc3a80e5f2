#include "tlmor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tlmor {

Vector vec(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

void normalize_column_signs(Matrix& V) {
  for (Index j = 0; j < V.cols(); ++j) {
    Index imax = 0;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0) V.col(j) *= -1.0;
  }
}

SymmetricEigen sorted_symmetric_eigen(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(X));
  if (es.info() != Eigen::Success) throw Error("symmetric eigendecomposition failed");
  const Index n = X.rows();
  // SelfAdjointEigenSolver returns ascending order.
  SymmetricEigen out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  normalize_column_signs(out.vectors);
  (void)n;
  return out;
}

Matrix clamp_psd(const Matrix& X, double rel_tol, double* most_negative) {
  if (X.size() == 0) return X;
  SymmetricEigen es = sorted_symmetric_eigen(X);
  const double scale = es.values.cwiseAbs().maxCoeff();
  const double lowest = es.values.minCoeff();
  if (most_negative) *most_negative = lowest;
  if (lowest >= 0.0) return symmetrized(X);
  Vector lam = es.values;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam(i) < 0.0 && -lam(i) <= rel_tol * scale) lam(i) = 0.0;
  return symmetrized(es.vectors * lam.asDiagonal() * es.vectors.transpose());
}

Matrix fold_psd(const Matrix& X, double rel_tol, double* most_negative) {
  if (X.size() == 0) return X;
  SymmetricEigen es = sorted_symmetric_eigen(X);
  const double scale = es.values.cwiseAbs().maxCoeff();
  const double lowest = es.values.minCoeff();
  if (most_negative) *most_negative = lowest;
  if (lowest >= 0.0) return symmetrized(X);
  Vector lam = es.values;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam(i) < 0.0) lam(i) = -lam(i) <= rel_tol * scale ? 0.0 : -lam(i);
  return symmetrized(es.vectors * lam.asDiagonal() * es.vectors.transpose());
}

double min_eigenvalue(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(X), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix psd_factor(const Matrix& K, double rel_tol) {
  const Index q = K.rows();
  if (K.cols() != q) throw DimensionError("psd_factor: matrix not square");
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() == Eigen::Success) {
    Matrix L = llt.matrixL();
    if ((L * L.transpose() - K).norm() <= 1e-12 * std::max(1.0, K.norm())) return L;
  }
  // Diagonally pivoted outer-product Cholesky, stopping at numerical rank.
  Matrix R = symmetrized(K);
  Matrix F = Matrix::Zero(q, q);
  const double scale = std::max(K.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  std::vector<bool> used(static_cast<size_t>(q), false);
  for (Index k = 0; k < q; ++k) {
    Index piv = -1;
    double best = 0.0;
    for (Index i = 0; i < q; ++i)
      if (!used[static_cast<size_t>(i)] && R(i, i) > best) {
        best = R(i, i);
        piv = i;
      }
    if (piv < 0 || best <= rel_tol * scale) break;
    used[static_cast<size_t>(piv)] = true;
    const double d = std::sqrt(best);
    Vector col = R.col(piv) / d;
    for (Index i = 0; i < q; ++i)
      if (used[static_cast<size_t>(i)] && i != piv) col(i) = 0.0;
    col(piv) = d;
    F.col(k) = col;
    R -= col * col.transpose();
  }
  if (R.diagonal().minCoeff() < -1e-10 * scale)
    throw Error("psd_factor: noise covariance is not positive semidefinite");
  return F;
}

Vector principal_angles(const Matrix& U, const Matrix& V) {
  Eigen::HouseholderQR<Matrix> qu(U), qv(V);
  Matrix Qu = qu.householderQ() * Matrix::Identity(U.rows(), U.cols());
  Matrix Qv = qv.householderQ() * Matrix::Identity(V.rows(), V.cols());
  Eigen::JacobiSVD<Matrix> svd(Qu.transpose() * Qv);
  Vector s = svd.singularValues();
  Vector ang(s.size());
  for (Index i = 0; i < s.size(); ++i) ang(i) = std::acos(std::clamp(s(i), -1.0, 1.0));
  std::sort(ang.data(), ang.data() + ang.size());
  return ang;
}

}  // namespace tlmor
