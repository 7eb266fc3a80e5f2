#pragma once

#include "tlmor/lyapunov.hpp"
#include "tlmor/system.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace tlmor {

enum class GramianProvenance { Exact, Sampled, Approx };
const char* to_string(GramianProvenance p);

/// Finite-horizon Gramians P_T, Q_T defined through
///   F(T) - B B^T   = (L_A + Pi)(P_T),
///   G(T) - C^T C   = (L_A^* + Pi^*)(Q_T),
/// together with the terminal covariances (exact, sampled or approximated)
/// that produced them.
struct GramianSet {
  Matrix P, Q;
  Matrix F_T, G_T;
  double T = 0.0;
  GramianProvenance provenance = GramianProvenance::Exact;
  std::map<std::string, double> diagnostics;
};

GramianSet exact_gramians(const StochasticLinearSystem& sys, double T, const LyapunovSolveOptions& opts = {});

/// Sampled estimator of F(T) (or G(T) via the dual system). Each realization
/// is x(T) x(T)^T with x started at the columns of B, optionally minus the
/// Ito-integral correction that lowers the variance without adding bias.
struct EstimatorConfig {
  Index M = 10;          // realizations
  Index n_g = 1000;      // time steps per realization
  double c = 0.0;        // weight of the Pi(I) term in the correction propagator
  bool include_ito_correction = false;
  std::uint64_t seed = 20240601;
  void validate() const;
};

enum class CovarianceSide { Reachability, Observability };

struct CovarianceEstimate {
  Matrix mean;
  Matrix stderr_;  // entrywise standard error of the mean
  double total_variance = 0.0;  // E||E_j - mean||_F^2 estimated from the realizations
  Index M = 0;
};

CovarianceEstimate sample_terminal_covariance(const StochasticLinearSystem& sys, double T,
                                              const EstimatorConfig& cfg,
                                              CovarianceSide side = CovarianceSide::Reachability);

GramianSet sampled_gramians(const StochasticLinearSystem& sys, double T, const EstimatorConfig& cfg,
                            const LyapunovSolveOptions& opts = {});

/// Deterministic approximation
///   F(T) ~ e^{AT} B B^T e^{A^T T} + c_F int_0^T e^{As} Pi(I) e^{A^T s} ds
/// and its dual counterpart weighted by c_G.
struct ApproxConfig {
  double c_F = 0.0;
  double c_G = 0.0;
};

GramianSet approx_gramians(const StochasticLinearSystem& sys, double T, const ApproxConfig& cfg,
                           const LyapunovSolveOptions& opts = {});

/// int_0^t e^{As} M e^{A^T s} ds. Solved through the Lyapunov identity
/// L_A(Y) = e^{At} M e^{A^T t} - M when L_A is regular, elementwise in the
/// eigenbasis for diagonal A, and by adaptive Simpson quadrature otherwise.
Matrix exp_congruence_integral(const Matrix& A, const Matrix& M, double t);

}  // namespace tlmor
