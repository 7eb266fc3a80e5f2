#include "tlmor/covflow.hpp"

#include "tlmor/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace tlmor {

namespace {

Matrix taylor_steps(const SylvesterOperator& op, const Matrix& X0, double t, long steps, int max_terms) {
  const double h = t / static_cast<double>(steps);
  Matrix X = X0;
  for (long s = 0; s < steps; ++s) {
    Matrix term = X;
    Matrix sum = X;
    int small = 0;
    int k = 1;
    for (; k <= max_terms; ++k) {
      term = op.apply(term) * (h / k);
      sum += term;
      const double tn = term.norm();
      const double sn = sum.norm();
      small = (tn <= 1e-17 * sn || sn == 0.0) ? small + 1 : 0;
      if (small == 2) break;
    }
    if (k > max_terms) throw ConvergenceError("expm_action: Taylor series did not converge on a sub-step", {});
    X = std::move(sum);
  }
  return X;
}

}  // namespace

Matrix expm_action(const SylvesterOperator& op, const Matrix& X0, double t, const ExpmActionOptions& opts) {
  if (X0.rows() != op.rows() || X0.cols() != op.cols()) throw DimensionError("expm_action: X0 shape mismatch");
  if (t < 0.0 || !std::isfinite(t)) throw Error("expm_action: t must be finite and nonnegative");
  if (t == 0.0) return X0;
  const double norm = op.norm_estimate();
  long steps = std::max(1L, static_cast<long>(std::ceil(t * norm)));
  Matrix prev = taylor_steps(op, X0, t, steps, opts.max_terms);
  std::vector<double> history;
  for (int refine = 0; refine < opts.max_refinements; ++refine) {
    steps *= 2;
    Matrix next = taylor_steps(op, X0, t, steps, opts.max_terms);
    if (!next.allFinite()) throw BlowUpError("expm_action: non-finite result");
    const double diff = (next - prev).norm();
    const double scale = std::max(next.norm(), std::numeric_limits<double>::min());
    history.push_back(diff / scale);
    if (diff <= opts.agreement_tol * scale) return next;
    prev = std::move(next);
  }
  std::ostringstream os;
  os << "expm_action: refinements did not agree after " << steps << " sub-steps";
  throw ConvergenceError(os.str(), history);
}

Matrix expm_action(const GeneralizedLyapunovOperator& op, const Matrix& X0, double t, const ExpmActionOptions& opts) {
  Matrix X = expm_action(op.as_sylvester(), X0, t, opts);
  if (X0.isApprox(X0.transpose(), 0.0)) X = symmetrized(X);
  return X;
}

Matrix expm_action_dense(const SylvesterOperator& op, const Matrix& X0, double t) {
  const Matrix Kr = op.kronecker();
  const Matrix E = (Kr * t).exp();
  return unvec(E * vec(X0), X0.rows(), X0.cols());
}

Matrix terminal_F(const StochasticLinearSystem& sys, double T) {
  GeneralizedLyapunovOperator op(sys, LyapunovMode::Primal);
  return expm_action(op, sys.B * sys.B.transpose(), T);
}

Matrix terminal_G(const StochasticLinearSystem& sys, double T) { return terminal_F(sys.dual(), T); }

CoupledCovariance terminal_coupled(const StochasticLinearSystem& sys, const ReducedSystem& rom, double T) {
  CoupledCovariance out;
  SylvesterOperator bar(rom.A11, rom.A11, rom.N11, rom.N11, sys.K);
  out.barF = symmetrized(expm_action(bar, rom.B1 * rom.B1.transpose(), T));
  SylvesterOperator tilde(sys.A, rom.A11, sys.N, rom.N11, sys.K);
  out.tildeF = expm_action(tilde, sys.B * rom.B1.transpose(), T);
  return out;
}

}  // namespace tlmor
