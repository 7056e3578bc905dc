#pragma once

#include "sace/model.hpp"

namespace sace {

enum class PenaltyFamily { L1, MCP };

/// Penalty configuration shared by every estimator.
///
/// The objective minimized by all solvers is
///
///   1/2 ||y - X b||^2 + (ridge_weight / 2) ||b||^2 + sum_j pen(|b_j|) - d * b0^T b
///
/// where pen is lambda * |t| (L1) or the MCP with concavity gamma and kink at
/// gamma * lambda / n. ridge_weight is 1 for SACE/GSACE, 0 for plain Lasso/MCP
/// and 2 * lambda2 for the naive Elastic Net lambda2 * ||b||^2.
struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::L1;
  double lambda = 0.0;
  double gamma = 3.0;
  double d = 0.0;
  double ridge_weight = 0.0;

  /// Throws BadD, BadGamma or InvalidArgument. n is the sample count used by the
  /// MCP kink and the coordinate convexity check n + ridge - n / gamma > 0.
  void validate(Index n) const;
};

/// sign(z) * max(|z| - t, 0).
double soft_threshold(double z, double t);

/// lambda * integral_0^|t| (1 - n x / (gamma lambda))_+ dx in closed form.
double mcp_value(double t, double lambda, double gamma, Index n);

/// lambda * (1 - n |t| / (gamma lambda))_+.
double mcp_derivative(double t, double lambda, double gamma, Index n);

/// pen(|t|) for the given family.
double penalty_value(const PenaltySpec& spec, double t, Index n);

/// Derivative of pen at |t| (t != 0), or at 0+ when t == 0.
double penalty_derivative(const PenaltySpec& spec, double t, Index n);

/// Full objective for any spec. beta0 may be empty when spec.d == 0.
double objective(const Dataset& data, const CoefficientVector& beta, const PenaltySpec& spec,
                 const CoefficientVector& beta0);

/// 1/2||y - Xb||^2 + 1/2||b||^2 + lambda ||b||_1 - d b0^T b.
double sace_objective(const Dataset& data, const CoefficientVector& beta, const PenaltySpec& spec,
                      const CoefficientVector& beta0);

/// 1/2||y - Xb||^2 + 1/2||b||^2 + sum_j rho(|b_j|; lambda, gamma) - d b0^T b.
double gsace_objective(const Dataset& data, const CoefficientVector& beta,
                       const PenaltySpec& spec, const CoefficientVector& beta0);

/// Naive Elastic Net: 1/2||y - Xb||^2 + lambda1 ||b||_1 + lambda2 ||b||^2.
double elastic_net_objective(const Dataset& data, const CoefficientVector& beta, double lambda1,
                             double lambda2);

struct AdaptiveWeightVector {
  Vector values;
};

/// lambda - d * b0_j * tau_j per coordinate. tau entries must be -1, 0 or +1.
AdaptiveWeightVector adaptive_weights(const PenaltySpec& spec, const CoefficientVector& beta0,
                                      const Vector& tau);

}  // namespace sace
