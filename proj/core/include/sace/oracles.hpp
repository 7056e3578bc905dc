#pragma once

#include "sace/model.hpp"
#include "sace/solvers.hpp"

#include <cstdint>

namespace sace {

/// Reference estimators on a known support S.
struct OracleEstimates {
  CoefficientVector beta_ols;
  CoefficientVector beta_liu;  ///< (X_S^T X_S + I)^{-1} (X_S^T X_S + d I) beta_ols
  double lambda_min_S = 0.0;   ///< smallest eigenvalue of (1/n) X_S^T X_S
  double d = 0.0;
};

/// Least squares restricted to S, zeros elsewhere. Throws RankDeficient.
CoefficientVector ols_on_support(const Dataset& data, const SupportSet& S);

OracleEstimates liu_oracle(const Dataset& data, const SupportSet& S, double d);

enum class Theorem3Event { SignMatch, OracleMatch, Neither };

/// SignMatch when sign(fit) == sign(truth) coordinatewise (takes precedence),
/// OracleMatch when ||fit - beta_liu||_inf <= tol.
Theorem3Event theorem3_event(const FitResult& fit, const CoefficientVector& beta_true,
                             const OracleEstimates& oracle, double tol = 1e-4);

/// K * sqrt(q ln p / n).
double l2_bound(Index q, Index p, Index n, double K);

/// 4 sigma sqrt(n ln p), the penalty level under the un-normalized loss.
double theoretical_lambda(Index n, Index p, double sigma);

/// Monte Carlo probe of the restricted-eigenvalue constant over the cone
/// ||v_{O^c}||_1 <= 7 ||v_O||_1 with C = (1/n) X^T X. The estimate is a running
/// minimum of v^T C v / ||v||^2 over sampled cone vectors, so it can only
/// overestimate the true constant. It is a heuristic, not a certificate.
struct ReEstimate {
  double kappa_estimate = 0.0;
  int samples = 0;
};

/// The first probe is the bottom eigenvector of C restricted to O (zero-padded);
/// the remaining samples draw v_O Gaussian and spread a random fraction of the
/// cone's l1 budget over O^c. The sample stream is prefix-stable in samples.
ReEstimate re_probe(const Dataset& data, const SupportSet& O, int samples, std::uint64_t seed);

/// Outcome of comparing an estimation error with K sqrt(q ln p / n).
struct BoundCheck {
  double kappa_estimate = 0.0;
  double bound_value = 0.0;
  double K = 0.0;
  double error = 0.0;
  bool holds = false;
};

BoundCheck check_l2_bound(const CoefficientVector& beta_hat, const CoefficientVector& beta_true,
                          Index n, double K, double kappa_estimate = 0.0);

}  // namespace sace
