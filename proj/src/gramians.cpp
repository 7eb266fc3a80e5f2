#include "tlmor/gramians.hpp"

#include "tlmor/covflow.hpp"
#include "tlmor/linalg.hpp"
#include "tlmor/mcsim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace tlmor {

namespace {

constexpr double kClampTol = 1e-9;

Matrix solve_gramian(const StochasticLinearSystem& sys, LyapunovMode mode, const Matrix& rhs,
                     const LyapunovSolveOptions& opts, GramianSet& set, const char* tag) {
  GeneralizedLyapunovOperator op(sys, mode);
  LyapunovSolveResult res = solve_generalized(op, symmetrized(rhs), opts);
  // Exact Gramians only carry rounding-level negative eigenvalues. Inexact
  // right-hand sides can leave large negative ones; those directions are
  // kept with their magnitude rather than discarded by the balancing floor.
  double most_negative = 0.0;
  Matrix X = fold_psd(res.X, kClampTol, &most_negative);
  set.diagnostics[std::string(tag) + "_residual"] = res.residual;
  set.diagnostics[std::string(tag) + "_min_eigenvalue"] = most_negative;
  return X;
}

// (e^{z t} - 1) / z, continuous at z = 0.
double phi1(double z, double t) {
  const double zt = z * t;
  if (std::abs(zt) < 1e-8) return t * (1.0 + 0.5 * zt);
  return std::expm1(zt) / z;
}

Matrix simpson_integral(const Matrix& A, const Matrix& M, double t) {
  constexpr double kTol = 1e-9;
  constexpr int kMaxLevel = 18;
  Matrix prev;
  for (int level = 4; level <= kMaxLevel; ++level) {
    const long m = 1L << level;  // even number of intervals
    const double h = t / static_cast<double>(m);
    const Matrix Eh = (A * h).exp();
    Matrix Gk = M;
    Matrix sum = M;
    for (long k = 1; k <= m; ++k) {
      Gk = Eh * Gk * Eh.transpose();
      const double w = (k == m) ? 1.0 : ((k % 2 == 1) ? 4.0 : 2.0);
      sum += w * Gk;
    }
    Matrix cur = sum * (h / 3.0);
    if (level > 4 && (cur - prev).norm() <= kTol * std::max(cur.norm(), 1e-300)) return cur;
    prev = std::move(cur);
  }
  throw ConvergenceError("exp_congruence_integral: quadrature did not converge", {});
}

}  // namespace

const char* to_string(GramianProvenance p) {
  switch (p) {
    case GramianProvenance::Exact: return "exact";
    case GramianProvenance::Sampled: return "sampled";
    case GramianProvenance::Approx: return "approx";
  }
  return "?";
}

void EstimatorConfig::validate() const {
  if (M < 1) throw Error("EstimatorConfig: M must be at least 1");
  if (n_g < 1) throw Error("EstimatorConfig: n_g must be positive");
  if (!std::isfinite(c)) throw Error("EstimatorConfig: c must be finite");
}

GramianSet exact_gramians(const StochasticLinearSystem& sys, double T, const LyapunovSolveOptions& opts) {
  sys.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw Error("exact_gramians: T must be positive");
  GramianSet set;
  set.T = T;
  set.provenance = GramianProvenance::Exact;
  set.F_T = terminal_F(sys, T);
  set.G_T = terminal_G(sys, T);
  set.P = solve_gramian(sys, LyapunovMode::Primal, set.F_T - sys.B * sys.B.transpose(), opts, set, "P");
  set.Q = solve_gramian(sys, LyapunovMode::Adjoint, set.G_T - sys.C.transpose() * sys.C, opts, set, "Q");
  return set;
}

Matrix exp_congruence_integral(const Matrix& A, const Matrix& M, double t) {
  if (t == 0.0) return Matrix::Zero(M.rows(), M.cols());
  if (M.isZero(0.0)) return Matrix::Zero(M.rows(), M.cols());
  if (A.isDiagonal(0.0)) {
    const Vector a = A.diagonal();
    Matrix Y(M.rows(), M.cols());
    for (Index j = 0; j < M.cols(); ++j)
      for (Index i = 0; i < M.rows(); ++i) Y(i, j) = M(i, j) * phi1(a(i) + a(j), t);
    return Y;
  }
  try {
    StandardLyapunovSolver solver(A);
    const Matrix E = (A * t).exp();
    Matrix Y = solver.solve(E * M * E.transpose() - M);
    if (M.isApprox(M.transpose(), 0.0)) Y = symmetrized(Y);
    return Y;
  } catch (const SingularError&) {
    return simpson_integral(A, M, t);
  }
}

CovarianceEstimate sample_terminal_covariance(const StochasticLinearSystem& sys_in, double T,
                                              const EstimatorConfig& cfg, CovarianceSide side) {
  cfg.validate();
  sys_in.validate();
  const StochasticLinearSystem sys = side == CovarianceSide::Reachability ? sys_in : sys_in.dual();
  const Index n = sys.n();
  const Index m = sys.m();
  const Index q = sys.q();
  const NoisePlan plan = make_noise_plan(sys.K, T, cfg.n_g);
  const double h = plan.h;
  const rng::Stream stream =
      side == CovarianceSide::Reachability ? rng::Stream::ReachabilityEstimator : rng::Stream::ObservabilityEstimator;
  const rng::NormalGenerator gen(cfg.seed, stream);

  // The exponential Euler step is exact for N = 0, so the estimator then
  // reproduces e^{AT} B B^T e^{A^T T} with zero variance.
  Stepper stepper(sys, h, StepScheme::ExponentialEuler);
  const bool correct = cfg.include_ito_correction;
  Matrix Eh, Yh;
  if (correct) {
    Eh = (sys.A * h).exp();
    if (cfg.c != 0.0) {
      GeneralizedLyapunovOperator op(sys, LyapunovMode::Primal);
      Yh = exp_congruence_integral(sys.A, op.apply_noise(Matrix::Identity(n, n)), h);
    }
  }

  Matrix sum = Matrix::Zero(n, n), sumsq = Matrix::Zero(n, n);
  Matrix dW, U, Z, tmp, shift;
  for (Index j = 0; j < cfg.M; ++j) {
    Matrix X = sys.B;
    if (correct) Z = Matrix::Zero(n, n);
    double prefix = 0.0;
    for (Index k = 0; k < plan.steps; ++k) {
      wiener_increments(plan, gen, static_cast<std::uint64_t>(j), 1, k, dW);
      if (correct) {
        // Horner form of sum_k F(T - t_k, sum_i L_{N_i}(x_k x_k^T) dw_ik):
        //   Z <- E (Z + S_k) E^T + c (sum_{l<=k} sum_i dw_il) Y_h.
        U = Matrix::Zero(n, m);
        for (Index i = 0; i < q; ++i) U.noalias() += dW(i, 0) * (sys.N[i] * X);
        tmp = Z;
        tmp.noalias() += U * X.transpose();
        tmp.noalias() += X * U.transpose();
        Z.noalias() = Eh * tmp * Eh.transpose();
        if (cfg.c != 0.0) {
          prefix += dW.sum();
          Z += (cfg.c * prefix) * Yh;
        }
      }
      stepper.step(X, Vector(), dW.replicate(1, m));
    }
    if (!X.allFinite()) throw BlowUpError("sample_terminal_covariance: realization blew up; increase n_g");
    Matrix Ej = X * X.transpose();
    if (correct) Ej -= symmetrized(Z);
    // Moments are accumulated relative to the first realization, which keeps
    // the variance free of cancellation (and exactly zero for N = 0).
    if (j == 0) shift = Ej;
    Ej -= shift;
    sum += Ej;
    sumsq += Ej.cwiseProduct(Ej);
  }
  const double Md = static_cast<double>(cfg.M);
  CovarianceEstimate est;
  est.M = cfg.M;
  est.mean = shift + sum / Md;
  if (cfg.M > 1) {
    Matrix var = ((sumsq - sum.cwiseProduct(sum) / Md) / (Md - 1.0)).cwiseMax(0.0);
    est.stderr_ = (var / Md).cwiseSqrt();
    est.total_variance = var.sum();
  } else {
    est.stderr_ = Matrix::Zero(n, n);
  }
  return est;
}

GramianSet sampled_gramians(const StochasticLinearSystem& sys, double T, const EstimatorConfig& cfg,
                            const LyapunovSolveOptions& opts) {
  GramianSet set;
  set.T = T;
  set.provenance = GramianProvenance::Sampled;
  set.F_T = sample_terminal_covariance(sys, T, cfg, CovarianceSide::Reachability).mean;
  set.G_T = sample_terminal_covariance(sys, T, cfg, CovarianceSide::Observability).mean;
  set.P = solve_gramian(sys, LyapunovMode::Primal, set.F_T - sys.B * sys.B.transpose(), opts, set, "P");
  set.Q = solve_gramian(sys, LyapunovMode::Adjoint, set.G_T - sys.C.transpose() * sys.C, opts, set, "Q");
  set.diagnostics["M"] = static_cast<double>(cfg.M);
  return set;
}

GramianSet approx_gramians(const StochasticLinearSystem& sys, double T, const ApproxConfig& cfg,
                           const LyapunovSolveOptions& opts) {
  sys.validate();
  if (!std::isfinite(cfg.c_F) || !std::isfinite(cfg.c_G)) throw Error("approx_gramians: weights must be finite");
  GramianSet set;
  set.T = T;
  set.provenance = GramianProvenance::Approx;
  const Index n = sys.n();
  const Matrix E = (sys.A * T).exp();
  set.F_T = E * sys.B * sys.B.transpose() * E.transpose();
  set.G_T = E.transpose() * sys.C.transpose() * sys.C * E;
  if (cfg.c_F != 0.0) {
    GeneralizedLyapunovOperator op(sys, LyapunovMode::Primal);
    set.F_T += cfg.c_F * exp_congruence_integral(sys.A, op.apply_noise(Matrix::Identity(n, n)), T);
  }
  if (cfg.c_G != 0.0) {
    GeneralizedLyapunovOperator op(sys, LyapunovMode::Adjoint);
    set.G_T += cfg.c_G * exp_congruence_integral(sys.A.transpose(), op.apply_noise(Matrix::Identity(n, n)), T);
  }
  set.F_T = symmetrized(set.F_T);
  set.G_T = symmetrized(set.G_T);
  set.P = solve_gramian(sys, LyapunovMode::Primal, set.F_T - sys.B * sys.B.transpose(), opts, set, "P");
  set.Q = solve_gramian(sys, LyapunovMode::Adjoint, set.G_T - sys.C.transpose() * sys.C, opts, set, "Q");
  return set;
}

}  // namespace tlmor
