#pragma once

#include "tlmor/types.hpp"

namespace tlmor {

inline Matrix symmetrized(const Matrix& X) { return 0.5 * (X + X.transpose()); }

/// Column-major vectorization and its inverse.
Vector vec(const Matrix& X);
Matrix unvec(const Vector& v, Index rows, Index cols);

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Each eigenvector is scaled so that its entry of largest
/// magnitude is positive.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // columns
};
SymmetricEigen sorted_symmetric_eigen(const Matrix& X);

/// Flip the sign of each column so that its largest-magnitude entry is positive.
void normalize_column_signs(Matrix& V);

/// Zero out negative eigenvalues of a symmetric matrix whose magnitude is at
/// most `rel_tol * max|eigenvalue|`. Larger negative eigenvalues are kept.
/// Returns the clamped matrix and reports the most negative eigenvalue seen.
Matrix clamp_psd(const Matrix& X, double rel_tol, double* most_negative = nullptr);

/// Like clamp_psd, but negative eigenvalues beyond the tolerance are replaced
/// by their magnitude instead of being kept (spectral absolute value).
Matrix fold_psd(const Matrix& X, double rel_tol, double* most_negative = nullptr);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& X);

/// Returns F with F * F^T == K for a symmetric positive semidefinite K.
/// Plain Cholesky first; for semidefinite K a diagonally pivoted Cholesky that
/// stops at the numerical rank, so that e.g. [[1,1],[1,1]] yields identical rows.
Matrix psd_factor(const Matrix& K, double rel_tol = 1e-12);

inline double frobenius_inner(const Matrix& X, const Matrix& Y) {
  return (X.array() * Y.array()).sum();
}

/// Principal angles (radians, ascending) between the column spans of U and V.
Vector principal_angles(const Matrix& U, const Matrix& V);

}  // namespace tlmor
