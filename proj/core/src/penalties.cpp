#include "sace/penalties.hpp"

#include "sace/errors.hpp"

#include <cmath>
#include <string>

namespace sace {

void PenaltySpec::validate(Index n) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be a finite nonnegative number");
  }
  if (!(d >= 0.0 && d <= 1.0)) throw BadD(d);
  if (!(ridge_weight >= 0.0) || !std::isfinite(ridge_weight)) {
    throw InvalidArgument("ridge weight must be a finite nonnegative number");
  }
  if (family == PenaltyFamily::MCP) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw BadGamma("gamma must be positive");
    const auto nd = static_cast<double>(n);
    if (ridge_weight == 0.0 && !(gamma > 1.0)) {
      throw BadGamma("plain MCP needs gamma > 1, got " + std::to_string(gamma));
    }
    if (!(nd + ridge_weight - nd / gamma > 0.0)) {
      throw BadGamma("n + ridge - n/gamma must be positive, got gamma = " +
                     std::to_string(gamma));
    }
  }
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double mcp_value(double t, double lambda, double gamma, Index n) {
  if (lambda <= 0.0) return 0.0;
  const double a = std::abs(t);
  const auto nd = static_cast<double>(n);
  const double kink = gamma * lambda / nd;
  if (a <= kink) return lambda * a - nd * a * a / (2.0 * gamma);
  return gamma * lambda * lambda / (2.0 * nd);
}

double mcp_derivative(double t, double lambda, double gamma, Index n) {
  if (lambda <= 0.0) return 0.0;
  const double slope = 1.0 - static_cast<double>(n) * std::abs(t) / (gamma * lambda);
  return slope > 0.0 ? lambda * slope : 0.0;
}

double penalty_value(const PenaltySpec& spec, double t, Index n) {
  return spec.family == PenaltyFamily::L1 ? spec.lambda * std::abs(t)
                                          : mcp_value(t, spec.lambda, spec.gamma, n);
}

double penalty_derivative(const PenaltySpec& spec, double t, Index n) {
  return spec.family == PenaltyFamily::L1 ? spec.lambda
                                          : mcp_derivative(t, spec.lambda, spec.gamma, n);
}

double objective(const Dataset& data, const CoefficientVector& beta, const PenaltySpec& spec,
                 const CoefficientVector& beta0) {
  const Vector r = residual(data, beta);
  double value = 0.5 * r.squaredNorm() + 0.5 * spec.ridge_weight * beta.values().squaredNorm();
  for (Index j = 0; j < beta.size(); ++j) value += penalty_value(spec, beta[j], data.n());
  if (spec.d != 0.0) {
    if (beta0.size() != beta.size()) throw DimensionMismatch("beta0 length differs from beta");
    value -= spec.d * beta0.values().dot(beta.values());
  }
  return value;
}

double sace_objective(const Dataset& data, const CoefficientVector& beta, const PenaltySpec& spec,
                      const CoefficientVector& beta0) {
  if (spec.family != PenaltyFamily::L1 || spec.ridge_weight != 1.0) {
    throw InvalidArgument("SACE objective needs an L1 spec with ridge weight 1");
  }
  return objective(data, beta, spec, beta0);
}

double gsace_objective(const Dataset& data, const CoefficientVector& beta,
                       const PenaltySpec& spec, const CoefficientVector& beta0) {
  if (spec.family != PenaltyFamily::MCP) throw InvalidArgument("GSACE objective needs an MCP spec");
  return objective(data, beta, spec, beta0);
}

double elastic_net_objective(const Dataset& data, const CoefficientVector& beta, double lambda1,
                             double lambda2) {
  const Vector r = residual(data, beta);
  return 0.5 * r.squaredNorm() + lambda1 * beta.values().lpNorm<1>() +
         lambda2 * beta.values().squaredNorm();
}

AdaptiveWeightVector adaptive_weights(const PenaltySpec& spec, const CoefficientVector& beta0,
                                      const Vector& tau) {
  if (beta0.size() != tau.size()) throw DimensionMismatch("tau length differs from beta0");
  for (Index j = 0; j < tau.size(); ++j) {
    if (tau[j] != -1.0 && tau[j] != 0.0 && tau[j] != 1.0) {
      throw InvalidArgument("tau entries must be -1, 0 or +1");
    }
  }
  Vector w = Vector::Constant(tau.size(), spec.lambda) -
             spec.d * beta0.values().cwiseProduct(tau);
  return {std::move(w)};
}

}  // namespace sace
