#pragma once

#include "tlmor/balancing.hpp"
#include "tlmor/covflow.hpp"

#include <iosfwd>
#include <string>

namespace tlmor {

/// A-posteriori bound sup_t E||y - y_r|| <= eps * ||u||_{L2[0,T]} with
///   eps^2 = tr(C P C^T) + tr(C1 barP C1^T) - 2 tr(C tildeP C1^T).
/// The hsv-form fields split eps^2 into a part weighted by the truncated
/// diagonal entries Sigma_2 and two covariance-mismatch terms.
struct ErrorBoundReport {
  Index r = 0;
  double eps_sq = 0.0;
  double eps = 0.0;
  double bound = 0.0;  // eps * u_norm
  double trace_full = 0.0;
  double trace_reduced = 0.0;
  double trace_cross = 0.0;
  bool has_hsv_terms = false;
  double term_hsv = 0.0;
  double term_cov_cross = 0.0;
  double term_cov_diag = 0.0;
  double agreement_residual = 0.0;  // |sum of terms - eps^2|
};

/// `P_T` must be the exact reachability Gramian of `sys` on [0, T] (the
/// reduced model may come from any Gramian pair).
ErrorBoundReport aposteriori_bound(const StochasticLinearSystem& sys, const ReducedSystem& rom, const Matrix& P_T,
                                   const CoupledCovariance& coupled, double u_norm);
/// Convenience overload computing P_T and the coupled flows.
ErrorBoundReport aposteriori_bound(const StochasticLinearSystem& sys, const ReducedSystem& rom, double T,
                                   double u_norm);

/// Fills the hsv-form terms of `base`. `tr` must diagonalize P_T and `F_T`
/// must be the terminal covariance that defines P_T.
ErrorBoundReport hsv_representation(const StochasticLinearSystem& sys, const ReducedSystem& rom,
                                    const BalancingTransform& tr, const Matrix& F_T,
                                    const CoupledCovariance& coupled, ErrorBoundReport base);

std::string to_key_value(const ErrorBoundReport& rep);
void write_bound_csv_header(std::ostream& os);
void write_bound_csv_row(std::ostream& os, const ErrorBoundReport& rep);

}  // namespace tlmor
