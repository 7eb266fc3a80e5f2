#include "tlmor/error_bound.hpp"

#include "tlmor/gramians.hpp"
#include "tlmor/linalg.hpp"
#include "tlmor/matrix_io.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace tlmor {

namespace {

std::vector<Matrix> transposed(const std::vector<Matrix>& xs) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const Matrix& x : xs) out.push_back(x.transpose());
  return out;
}

}  // namespace

ErrorBoundReport aposteriori_bound(const StochasticLinearSystem& sys, const ReducedSystem& rom, const Matrix& P_T,
                                   const CoupledCovariance& coupled, double u_norm) {
  const Index n = sys.n();
  if (P_T.rows() != n || P_T.cols() != n) throw DimensionError("aposteriori_bound: P_T shape mismatch");
  SylvesterOperator bar(rom.A11, rom.A11, rom.N11, rom.N11, sys.K);
  const Matrix barP = symmetrized(bar.solve_vectorized(coupled.barF - rom.B1 * rom.B1.transpose(), "reduced Gramian"));
  SylvesterOperator tilde(sys.A, rom.A11, sys.N, rom.N11, sys.K);
  const Matrix tildeP = tilde.solve_vectorized(coupled.tildeF - sys.B * rom.B1.transpose(), "coupled Gramian");

  ErrorBoundReport rep;
  rep.r = rom.r;
  rep.trace_full = (sys.C * P_T * sys.C.transpose()).trace();
  rep.trace_reduced = (rom.C1 * barP * rom.C1.transpose()).trace();
  rep.trace_cross = (sys.C * tildeP * rom.C1.transpose()).trace();
  rep.eps_sq = rep.trace_full + rep.trace_reduced - 2.0 * rep.trace_cross;
  const double scale = std::abs(rep.trace_full) + std::abs(rep.trace_reduced) + 2.0 * std::abs(rep.trace_cross);
  if (rep.eps_sq < -1e-8 * scale) {
    std::ostringstream os;
    os << "aposteriori_bound: eps^2 = " << rep.eps_sq << " is negative beyond rounding (scale " << scale << ")";
    throw Error(os.str());
  }
  rep.eps = std::sqrt(std::max(rep.eps_sq, 0.0));
  rep.bound = rep.eps * u_norm;
  return rep;
}

ErrorBoundReport aposteriori_bound(const StochasticLinearSystem& sys, const ReducedSystem& rom, double T,
                                   double u_norm) {
  const GramianSet g = exact_gramians(sys, T);
  return aposteriori_bound(sys, rom, g.P, terminal_coupled(sys, rom, T), u_norm);
}

ErrorBoundReport hsv_representation(const StochasticLinearSystem& sys, const ReducedSystem& rom,
                                    const BalancingTransform& tr, const Matrix& F_T,
                                    const CoupledCovariance& coupled, ErrorBoundReport rep) {
  const Index n = sys.n();
  const Index r = rom.r;
  const Index k = n - r;
  const StochasticLinearSystem& S = rom.transformed;
  const std::vector<Matrix> N11t = transposed(rom.N11);

  SylvesterOperator qbar_op(rom.A11.transpose(), rom.A11.transpose(), N11t, N11t, sys.K);
  const Matrix Qbar = symmetrized(qbar_op.solve_vectorized(-rom.C1.transpose() * rom.C1, "reduced observability"));
  SylvesterOperator qtil_op(rom.A11.transpose(), S.A.transpose(), N11t, transposed(S.N), sys.K);
  const Matrix Qtil = qtil_op.solve_vectorized(-rom.C1.transpose() * S.C, "coupled observability");

  const Matrix Sigma2 = rom.sigma2.asDiagonal();
  Matrix inner = rom.C2.transpose() * rom.C2 + 2.0 * rom.A12.transpose() * Qtil.rightCols(k);
  for (Index i = 0; i < sys.q(); ++i) {
    for (Index j = 0; j < sys.q(); ++j) {
      const double kij = sys.K(i, j);
      if (kij == 0.0) continue;
      const Matrix& Nj = S.N[static_cast<std::size_t>(j)];
      inner += kij * rom.N12[static_cast<std::size_t>(i)].transpose() *
               (2.0 * Qtil * Nj.rightCols(k) - Qbar * rom.N12[static_cast<std::size_t>(j)]);
    }
  }
  rep.term_hsv = (Sigma2 * inner).trace();

  const Matrix F_S = tr.S * F_T * tr.S.transpose();
  const Matrix tildeF_S = tr.S * coupled.tildeF;
  rep.term_cov_cross = 2.0 * (Qtil * (tildeF_S - F_S.leftCols(r))).trace();
  rep.term_cov_diag = (Qbar * (F_S.topLeftCorner(r, r) - coupled.barF)).trace();
  rep.has_hsv_terms = true;
  rep.agreement_residual = std::abs(rep.term_hsv + rep.term_cov_cross + rep.term_cov_diag - rep.eps_sq);
  return rep;
}

std::string to_key_value(const ErrorBoundReport& rep) {
  std::ostringstream os;
  os << "r = " << rep.r << "\n";
  os << "eps = " << io::format_double(rep.eps) << "\n";
  os << "eps_sq = " << io::format_double(rep.eps_sq) << "\n";
  os << "bound = " << io::format_double(rep.bound) << "\n";
  if (rep.has_hsv_terms) {
    os << "term_hsv = " << io::format_double(rep.term_hsv) << "\n";
    os << "term_cov_cross = " << io::format_double(rep.term_cov_cross) << "\n";
    os << "term_cov_diag = " << io::format_double(rep.term_cov_diag) << "\n";
    os << "agreement_residual = " << io::format_double(rep.agreement_residual) << "\n";
  }
  return os.str();
}

void write_bound_csv_header(std::ostream& os) {
  os << "r,eps,term_hsv,term_cov_cross,term_cov_diag,agreement_residual\n";
}

void write_bound_csv_row(std::ostream& os, const ErrorBoundReport& rep) {
  os << rep.r << ',' << io::format_double(rep.eps) << ',' << io::format_double(rep.term_hsv) << ','
     << io::format_double(rep.term_cov_cross) << ',' << io::format_double(rep.term_cov_diag) << ','
     << io::format_double(rep.agreement_residual) << '\n';
}

}  // namespace tlmor
