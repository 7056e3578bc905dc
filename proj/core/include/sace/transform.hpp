#pragma once

#include "sace/model.hpp"
#include "sace/solvers.hpp"

namespace sace {

/// Rewrites SACE as a Lasso on augmented data:
///
///   X* = 2^{-1/2} [X; I],   y* = [y + d B b0; 0],
///
/// where B holds (X_{xi0}^T)^+ on the columns of the initial support xi0 and zeros
/// elsewhere. Used to validate the direct solver, never as the production path.
struct ArtificialProblem {
  Matrix X_star;  ///< (n + p) x p
  Vector y_star;  ///< n + p
  Matrix B;       ///< n x p
  SupportSet support0;
};

struct PseudoInverse {
  Matrix matrix;  ///< (X_sub^T)^+, n x q
  Index rank = 0;
};

/// (X_sub^T)^+ through an SVD; singular values below 1e-10 * sigma_max count as zero.
PseudoInverse pseudo_inverse_transpose(const Matrix& X_sub);

ArtificialProblem build_artificial(const Dataset& data, const InitialEstimate& init, double d);

/// How the Lasso on (y*, X*) is mapped back: run it at lambda * lambda_multiplier
/// and multiply the solution by scale. Substituting b = sqrt2 * beta turns the
/// augmented Lasso into the SACE objective at d = 0, hence both factors 1/sqrt2.
struct TransformConvention {
  double scale = 0.70710678118654752;
  double lambda_multiplier = 0.70710678118654752;
};

CoefficientVector solve_via_transform(const ArtificialProblem& ap, double lambda,
                                      const TransformConvention& convention = {},
                                      const SolverOptions& opts = {});

struct EquivalenceReport {
  double max_gap = 0.0;  ///< l_inf distance to fit_sace under the chosen convention
  double calibrated_scale = 1.0;
  double calibrated_lambda_multiplier = 1.0;
  double calibrated_lambda = 0.0;  ///< lambda * multiplier
};

/// Searches scale in {1, 1/sqrt2, sqrt2} and lambda multiplier in
/// {1/2, 1/sqrt2, 1, sqrt2, 2} for the convention closest to fit_sace.
EquivalenceReport equivalence_report(const Dataset& data, const InitialEstimate& init, double d,
                                     double lambda, const SolverOptions& opts = {});

}  // namespace sace
