#include "tlmor/lyapunov.hpp"

#include "tlmor/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace tlmor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Half-vectorization index of (i, j), i <= j, for an n x n symmetric matrix.
inline Index sym_index(Index i, Index j, Index n) {
  // Column-major upper triangle: column j holds rows 0..j.
  (void)n;
  return j * (j + 1) / 2 + i;
}

Vector half_vec(const Matrix& X) {
  const Index n = X.rows();
  Vector v(n * (n + 1) / 2);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) v(sym_index(i, j, n)) = 0.5 * (X(i, j) + X(j, i));
  return v;
}

Matrix half_unvec(const Vector& v, Index n) {
  Matrix X(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) X(i, j) = X(j, i) = v(sym_index(i, j, n));
  return X;
}

std::string singular_message(const std::string& what, double rcond, double norm1) {
  std::ostringstream os;
  os << what << ": vectorized operator is numerically singular (reciprocal condition " << rcond
     << ", smallest singular value ~ " << rcond * norm1 << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// SylvesterOperator

SylvesterOperator::SylvesterOperator(Matrix A1, Matrix A2, std::vector<Matrix> N1, std::vector<Matrix> N2,
                                     Matrix K)
    : A1_(std::move(A1)), A2_(std::move(A2)), N1_(std::move(N1)), N2_(std::move(N2)), K_(std::move(K)) {
  const Index q = static_cast<Index>(N1_.size());
  if (A1_.rows() != A1_.cols() || A2_.rows() != A2_.cols())
    throw DimensionError("operator: drift matrices must be square");
  if (static_cast<Index>(N2_.size()) != q || K_.rows() != q || K_.cols() != q)
    throw DimensionError("operator: noise lists and K disagree");
  for (Index i = 0; i < q; ++i) {
    if (N1_[i].rows() != rows() || N1_[i].cols() != rows() || N2_[i].rows() != cols() ||
        N2_[i].cols() != cols())
      throw DimensionError("operator: noise matrix dimension mismatch");
  }
  N2K_.resize(static_cast<size_t>(q));
  for (Index i = 0; i < q; ++i) {
    Matrix acc = Matrix::Zero(cols(), cols());
    for (Index j = 0; j < q; ++j)
      if (K_(i, j) != 0.0) acc += K_(i, j) * N2_[j];
    N2K_[static_cast<size_t>(i)] = std::move(acc);
  }
}

Matrix SylvesterOperator::apply(const Matrix& X) const {
  if (X.rows() != rows() || X.cols() != cols()) throw DimensionError("operator: argument has wrong shape");
  Matrix Y = A1_ * X;
  Y.noalias() += X * A2_.transpose();
  for (size_t i = 0; i < N1_.size(); ++i) {
    Matrix NX = N1_[i] * X;
    Y.noalias() += NX * N2K_[i].transpose();
  }
  return Y;
}

Matrix SylvesterOperator::kronecker() const {
  const Index n1 = rows(), n2 = cols();
  Matrix Kr = Eigen::kroneckerProduct(Matrix::Identity(n2, n2), A1_).eval();
  Kr += Eigen::kroneckerProduct(A2_, Matrix::Identity(n1, n1)).eval();
  for (size_t i = 0; i < N1_.size(); ++i) Kr += Eigen::kroneckerProduct(N2K_[i], N1_[i]).eval();
  return Kr;
}

Matrix SylvesterOperator::solve_vectorized(const Matrix& L, const std::string& what) const {
  if (L.rows() != rows() || L.cols() != cols()) throw DimensionError(what + ": right-hand side has wrong shape");
  const Matrix Kr = kronecker();
  Eigen::PartialPivLU<Matrix> lu(Kr);
  const double rcond = lu.rcond();
  const double norm1 = Kr.cwiseAbs().colwise().sum().maxCoeff();
  if (!(rcond > 1e3 * kEps)) throw SingularError(singular_message(what, rcond, norm1));
  Vector x = lu.solve(vec(L));
  // One step of iterative refinement.
  Vector r = vec(L) - Kr * x;
  x += lu.solve(r);
  return unvec(x, rows(), cols());
}

double SylvesterOperator::norm_estimate(int iterations) const {
  // Deterministic start so that callers are reproducible.
  Matrix X(rows(), cols());
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < X.rows(); ++i) X(i, j) = 1.0 + 0.37 * std::sin(1.3 * static_cast<double>(i + 3 * j + 1));
  double est = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const double xn = X.norm();
    if (xn == 0.0) break;
    X /= xn;
    Matrix Y = apply(X);
    est = std::max(est, Y.norm());
    X = std::move(Y);
  }
  return est;
}

// ---------------------------------------------------------------------------
// GeneralizedLyapunovOperator

namespace {

SylvesterOperator make_lyapunov_operator(const StochasticLinearSystem& sys, LyapunovMode mode) {
  if (mode == LyapunovMode::Primal) return SylvesterOperator(sys.A, sys.A, sys.N, sys.N, sys.K);
  std::vector<Matrix> Nt;
  for (const Matrix& Ni : sys.N) Nt.push_back(Ni.transpose());
  return SylvesterOperator(sys.A.transpose(), sys.A.transpose(), Nt, Nt, sys.K);
}

}  // namespace

GeneralizedLyapunovOperator::GeneralizedLyapunovOperator(const StochasticLinearSystem& sys, LyapunovMode mode)
    : mode_(mode), op_(make_lyapunov_operator(sys, mode)) {}

Matrix GeneralizedLyapunovOperator::apply_noise(const Matrix& X) const {
  Matrix Y = Matrix::Zero(X.rows(), X.cols());
  const Index q = static_cast<Index>(op_.N1().size());
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < q; ++j)
      if (op_.K()(i, j) != 0.0) Y.noalias() += op_.K()(i, j) * op_.N1()[i] * X * op_.N2()[j].transpose();
  return Y;
}

Matrix kronecker_matrix(const StochasticLinearSystem& sys, Index cap) {
  const Index n = sys.n();
  if (n * n > cap) {
    std::ostringstream os;
    os << "kronecker_matrix: n^2 = " << n * n << " exceeds the cap " << cap
       << "; use the matrix-free operator paths instead";
    throw DimensionError(os.str());
  }
  return GeneralizedLyapunovOperator(sys, LyapunovMode::Primal).as_sylvester().kronecker();
}

// ---------------------------------------------------------------------------
// Generalized Lyapunov solves

namespace {

// Restriction of the operator to symmetric matrices in half-vectorized
// coordinates: column (i,j) is half_vec(op(E_ij + E_ji)) (or op(E_ii)).
Matrix symmetric_block(const SylvesterOperator& op) {
  const Index n = op.rows();
  const Index s = n * (n + 1) / 2;
  const Matrix& A = op.A1();
  const Index q = static_cast<Index>(op.N1().size());
  std::vector<Matrix> M(static_cast<size_t>(q));  // sum_b k_ab N_b
  for (Index a = 0; a < q; ++a) {
    M[a] = Matrix::Zero(n, n);
    for (Index b = 0; b < q; ++b) M[a] += op.K()(a, b) * op.N2()[b];
  }
  // Entry of the full Kronecker matrix for output (k,l), input (i,j).
  auto full = [&](Index k, Index l, Index i, Index j) {
    double v = 0.0;
    if (l == j) v += A(k, i);
    if (k == i) v += A(l, j);
    for (Index a = 0; a < q; ++a) v += op.N1()[a](k, i) * M[a](l, j);
    return v;
  };
  Matrix Ks(s, s);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) {
      const Index col = sym_index(i, j, n);
      for (Index l = 0; l < n; ++l)
        for (Index k = 0; k <= l; ++k) {
          double v = full(k, l, i, j);
          if (i != j) v += full(k, l, j, i);
          Ks(sym_index(k, l, n), col) = v;
        }
    }
  return Ks;
}

LyapunovSolveResult solve_direct(const GeneralizedLyapunovOperator& op, const Matrix& L,
                                 const LyapunovSolveOptions& opts) {
  const Index n = op.dim();
  if (n > opts.direct_cap_n) {
    std::ostringstream os;
    os << "solve_generalized: n = " << n << " exceeds the direct-solve cap " << opts.direct_cap_n
       << "; use the iterative strategy";
    throw DimensionError(os.str());
  }
  const Matrix Ks = symmetric_block(op.as_sylvester());
  Eigen::PartialPivLU<Matrix> lu(Ks);
  const double rcond = lu.rcond();
  if (!(rcond > 1e3 * kEps)) {
    const double norm1 = Ks.cwiseAbs().colwise().sum().maxCoeff();
    throw SingularError(singular_message("generalized Lyapunov equation", rcond, norm1));
  }
  const Vector rhs = half_vec(L);
  Vector x = lu.solve(rhs);
  LyapunovSolveResult res;
  const double target = opts.rel_tol * std::max(1.0, L.norm());
  for (int refine = 0; refine < 3; ++refine) {
    res.X = half_unvec(x, n);
    res.residual = (op.apply(res.X) - L).norm();
    res.history.push_back(res.residual);
    if (res.residual <= 1e-3 * target) break;
    x += lu.solve(rhs - Ks * x);
  }
  if (!(res.residual <= target)) {
    std::ostringstream os;
    os << "generalized Lyapunov equation: direct solve residual " << res.residual << " above " << target;
    throw ConvergenceError(os.str(), res.history);
  }
  return res;
}

LyapunovSolveResult solve_iterative(const GeneralizedLyapunovOperator& op, const Matrix& L,
                                    const LyapunovSolveOptions& opts) {
  const Index n = op.dim();
  const Matrix& A = op.drift();
  double mu = opts.shift.value_or(0.0);
  std::optional<StandardLyapunovSolver> inner;
  try {
    inner.emplace(A - mu * Matrix::Identity(n, n));
  } catch (const SingularError&) {
    if (opts.shift) throw;
    // Shift so that A - mu I is stable and the inner solves are well posed.
    Eigen::EigenSolver<Matrix> es(A, false);
    mu = es.eigenvalues().real().maxCoeff() + 1.0;
    inner.emplace(A - mu * Matrix::Identity(n, n));
  }

  LyapunovSolveResult res;
  res.shift = mu;
  const double target = opts.rel_tol * std::max(1.0, L.norm());
  Matrix X = Matrix::Zero(n, n);
  int growth = 0;
  for (int k = 1; k <= opts.max_iter; ++k) {
    Matrix rhs = L - op.apply_noise(X);
    if (mu != 0.0) rhs += 2.0 * mu * X;
    X = symmetrized(inner->solve(rhs));
    const double r = (op.apply(X) - L).norm();
    if (!std::isfinite(r)) break;
    if (!res.history.empty() && r > res.history.back())
      ++growth;
    else
      growth = 0;
    res.history.push_back(r);
    res.iterations = k;
    if (r <= target) {
      res.X = std::move(X);
      res.residual = r;
      return res;
    }
    if (growth >= 10) {
      std::ostringstream os;
      os << "generalized Lyapunov equation: stationary iteration diverges (shift " << mu << ", residual "
         << r << " after " << k << " steps)";
      throw ConvergenceError(os.str(), res.history);
    }
  }
  std::ostringstream os;
  os << "generalized Lyapunov equation: stationary iteration did not converge in " << opts.max_iter
     << " steps (shift " << mu << ", last residual " << (res.history.empty() ? NAN : res.history.back()) << ")";
  throw ConvergenceError(os.str(), res.history);
}

}  // namespace

LyapunovSolveResult solve_generalized(const GeneralizedLyapunovOperator& op, const Matrix& L,
                                      const LyapunovSolveOptions& opts) {
  if (L.rows() != op.dim() || L.cols() != op.dim())
    throw DimensionError("solve_generalized: right-hand side has wrong shape");
  if ((L - L.transpose()).norm() > 1e-10 * std::max(1.0, L.norm()))
    throw Error("solve_generalized: right-hand side must be symmetric");
  const Matrix Ls = symmetrized(L);
  LyapunovSolveResult res =
      opts.strategy == LyapunovStrategy::Direct ? solve_direct(op, Ls, opts) : solve_iterative(op, Ls, opts);
  res.X = symmetrized(res.X);
  return res;
}

// ---------------------------------------------------------------------------
// Bartels-Stewart

StandardLyapunovSolver::StandardLyapunovSolver(const Matrix& A) {
  const Index n = A.rows();
  if (A.cols() != n) throw DimensionError("standard Lyapunov: A must be square");
  Eigen::RealSchur<Matrix> rs(A);
  if (rs.info() != Eigen::Success) throw Error("standard Lyapunov: real Schur decomposition failed");
  U_ = rs.matrixU();
  T_ = rs.matrixT();
  std::vector<std::complex<double>> eig;
  for (Index i = 0; i < n;) {
    if (i + 1 < n && T_(i + 1, i) != 0.0) {
      blocks_.emplace_back(i, 2);
      const double a = T_(i, i), b = T_(i, i + 1), c = T_(i + 1, i), d = T_(i + 1, i + 1);
      const double tr = 0.5 * (a + d);
      const std::complex<double> disc = std::sqrt(std::complex<double>(0.25 * (a - d) * (a - d) + b * c));
      eig.push_back(tr + disc);
      eig.push_back(tr - disc);
      i += 2;
    } else {
      blocks_.emplace_back(i, 1);
      eig.emplace_back(T_(i, i), 0.0);
      i += 1;
    }
  }
  double scale = 1.0;
  for (const auto& e : eig) scale = std::max(scale, std::abs(e));
  min_sum_ = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < eig.size(); ++i)
    for (size_t j = i; j < eig.size(); ++j) min_sum_ = std::min(min_sum_, std::abs(eig[i] + eig[j]));
  if (min_sum_ <= 1e-10 * scale) {
    std::ostringstream os;
    os << "standard Lyapunov: eigenvalue collision, lambda_i + lambda_j = " << min_sum_
       << " (spectra of A and -A^T intersect)";
    throw SingularError(os.str());
  }
}

Matrix StandardLyapunovSolver::solve(const Matrix& RHS) const {
  const Index n = T_.rows();
  if (RHS.rows() != n || RHS.cols() != n) throw DimensionError("standard Lyapunov: RHS has wrong shape");
  const Matrix C = U_.transpose() * RHS * U_;
  Matrix Y = Matrix::Zero(n, n);
  for (auto jb = blocks_.rbegin(); jb != blocks_.rend(); ++jb) {
    const auto [cj, sj] = *jb;
    const Index after_j = cj + sj;
    Matrix R = C.middleCols(cj, sj);
    if (after_j < n) R.noalias() -= Y.rightCols(n - after_j) * T_.block(cj, after_j, sj, n - after_j).transpose();
    const Matrix Tjj = T_.block(cj, cj, sj, sj);
    for (auto ib = blocks_.rbegin(); ib != blocks_.rend(); ++ib) {
      const auto [ci, si] = *ib;
      const Index after_i = ci + si;
      Matrix Rij = R.middleRows(ci, si);
      if (after_i < n) Rij.noalias() -= T_.block(ci, after_i, si, n - after_i) * Y.block(after_i, cj, n - after_i, sj);
      if (si == 1 && sj == 1) {
        Y(ci, cj) = Rij(0, 0) / (T_(ci, ci) + Tjj(0, 0));
        continue;
      }
      // Small Sylvester block T_ii Y + Y T_jj^T = Rij via its Kronecker form.
      const Matrix Tii = T_.block(ci, ci, si, si);
      Matrix M = Eigen::kroneckerProduct(Matrix::Identity(sj, sj), Tii).eval() +
                 Eigen::kroneckerProduct(Tjj, Matrix::Identity(si, si)).eval();
      Vector y = M.fullPivLu().solve(vec(Rij));
      Y.block(ci, cj, si, sj) = unvec(y, si, sj);
    }
  }
  return U_ * Y * U_.transpose();
}

Matrix solve_standard_lyapunov(const Matrix& A, const Matrix& RHS) {
  Matrix X = StandardLyapunovSolver(A).solve(RHS);
  if ((RHS - RHS.transpose()).norm() <= 1e-12 * std::max(1.0, RHS.norm())) X = symmetrized(X);
  return X;
}

}  // namespace tlmor
