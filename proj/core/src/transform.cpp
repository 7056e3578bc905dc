#include "sace/transform.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace sace {

PseudoInverse pseudo_inverse_transpose(const Matrix& X_sub) {
  if (X_sub.cols() < 1) throw InvalidArgument("pseudo-inverse needs at least one column");
  // X_sub = U S V^T, so (X_sub^T)^+ = (X_sub^+)^T = U S^+ V^T.
  const Eigen::JacobiSVD<Matrix> svd(X_sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-10 * sv[0] : 0.0;

  PseudoInverse out;
  Vector inv = Vector::Zero(sv.size());
  for (Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > cutoff) {
      inv[k] = 1.0 / sv[k];
      ++out.rank;
    }
  }
  out.matrix = svd.matrixU() * inv.asDiagonal() * svd.matrixV().transpose();
  return out;
}

ArtificialProblem build_artificial(const Dataset& data, const InitialEstimate& init, double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw BadD(d);
  const Index n = data.n();
  const Index p = data.p();
  if (init.beta0.size() != p) throw DimensionMismatch("initial estimate has the wrong length");

  ArtificialProblem ap;
  ap.support0 = init.beta0.support();
  ap.B = Matrix::Zero(n, p);
  if (!ap.support0.empty()) {
    Matrix sub(n, ap.support0.size());
    Index k = 0;
    for (const Index j : ap.support0) sub.col(k++) = data.X().col(j);
    const auto pinv = pseudo_inverse_transpose(sub);
    k = 0;
    for (const Index j : ap.support0) ap.B.col(j) = pinv.matrix.col(k++);
  }

  const double root_half = std::sqrt(0.5);
  ap.X_star.resize(n + p, p);
  ap.X_star.topRows(n) = root_half * data.X();
  ap.X_star.bottomRows(p) = root_half * Matrix::Identity(p, p);

  ap.y_star = Vector::Zero(n + p);
  ap.y_star.head(n) = data.y();
  if (d != 0.0) ap.y_star.head(n) += d * (ap.B * init.beta0.values());
  return ap;
}

CoefficientVector solve_via_transform(const ArtificialProblem& ap, double lambda,
                                      const TransformConvention& convention,
                                      const SolverOptions& opts) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  const Dataset augmented(ap.X_star, ap.y_star);
  const auto fit = fit_lasso(augmented, lambda * convention.lambda_multiplier, nullptr, opts);
  return CoefficientVector(convention.scale * fit.beta.values());
}

EquivalenceReport equivalence_report(const Dataset& data, const InitialEstimate& init, double d,
                                     double lambda, const SolverOptions& opts) {
  const auto direct = fit_sace(data, lambda, d, &init, nullptr, opts);
  const auto ap = build_artificial(data, init, d);
  const Dataset augmented(ap.X_star, ap.y_star);

  const double r2 = std::sqrt(2.0);
  const std::array<double, 3> scales{1.0, 1.0 / r2, r2};
  const std::array<double, 5> multipliers{0.5, 1.0 / r2, 1.0, r2, 2.0};

  EquivalenceReport best;
  best.max_gap = std::numeric_limits<double>::infinity();
  for (const double m : multipliers) {
    const auto fit = fit_lasso(augmented, lambda * m, nullptr, opts);
    for (const double s : scales) {
      const double gap = (s * fit.beta.values() - direct.beta.values()).lpNorm<Eigen::Infinity>();
      if (gap < best.max_gap) {
        best.max_gap = gap;
        best.calibrated_scale = s;
        best.calibrated_lambda_multiplier = m;
        best.calibrated_lambda = lambda * m;
      }
    }
  }
  return best;
}

}  // namespace sace
