#include "sace/oracles.hpp"

#include "sace/rng.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace sace {
namespace {

Matrix gather_columns(const Dataset& data, const SupportSet& S) {
  Matrix out(data.n(), S.size());
  Index k = 0;
  for (const Index j : S) out.col(k++) = data.X().col(j);
  return out;
}

Vector scatter(const Vector& values, const SupportSet& S, Index p) {
  Vector out = Vector::Zero(p);
  Index k = 0;
  for (const Index j : S) out[j] = values[k++];
  return out;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

CoefficientVector ols_on_support(const Dataset& data, const SupportSet& S) {
  if (S.empty()) return CoefficientVector::zeros(data.p());
  if (S.size() > data.n()) throw RankDeficient("support larger than the sample size");
  const Matrix Xs = gather_columns(data, S);
  const Matrix gram = Xs.transpose() * Xs;
  const Eigen::LDLT<Matrix> ldlt(gram);
  const Vector diag = ldlt.vectorD();
  const double top = diag.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 1e-12 * top)) {
    throw RankDeficient("X_S is not of full column rank");
  }
  return CoefficientVector(scatter(ldlt.solve(Xs.transpose() * data.y()), S, data.p()));
}

OracleEstimates liu_oracle(const Dataset& data, const SupportSet& S, double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw BadD(d);
  OracleEstimates out;
  out.d = d;
  out.beta_ols = ols_on_support(data, S);
  if (S.empty()) {
    out.beta_liu = out.beta_ols;
    return out;
  }
  const Matrix Xs = gather_columns(data, S);
  const Matrix gram = Xs.transpose() * Xs;
  Vector ols_S(S.size());
  Index k = 0;
  for (const Index j : S) ols_S[k++] = out.beta_ols[j];

  // (A + I)^{-1}(A + dI) = I - (1 - d)(A + I)^{-1}, exact at d = 1.
  Matrix shifted = gram;
  shifted.diagonal().array() += 1.0;
  Vector liu_S = ols_S;
  if (d != 1.0) liu_S -= (1.0 - d) * shifted.llt().solve(ols_S);
  out.beta_liu = CoefficientVector(scatter(liu_S, S, data.p()));

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram / static_cast<double>(data.n()),
                                                  Eigen::EigenvaluesOnly);
  out.lambda_min_S = eig.eigenvalues()[0];
  return out;
}

Theorem3Event theorem3_event(const FitResult& fit, const CoefficientVector& beta_true,
                             const OracleEstimates& oracle, double tol) {
  if (fit.beta.size() != beta_true.size() || oracle.beta_liu.size() != beta_true.size()) {
    throw DimensionMismatch("fit, truth and oracle must have the same length");
  }
  bool signs = true;
  for (Index j = 0; j < beta_true.size() && signs; ++j) {
    signs = sign_of(fit.beta[j]) == sign_of(beta_true[j]);
  }
  if (signs) return Theorem3Event::SignMatch;
  const double gap =
      (fit.beta.values() - oracle.beta_liu.values()).lpNorm<Eigen::Infinity>();
  return gap <= tol ? Theorem3Event::OracleMatch : Theorem3Event::Neither;
}

double l2_bound(Index q, Index p, Index n, double K) {
  if (p < 2 || n < 1) throw InvalidArgument("l2_bound needs p >= 2 and n >= 1");
  return K * std::sqrt(static_cast<double>(q) * std::log(static_cast<double>(p)) /
                       static_cast<double>(n));
}

double theoretical_lambda(Index n, Index p, double sigma) {
  return 4.0 * sigma * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(p)));
}

ReEstimate re_probe(const Dataset& data, const SupportSet& O, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("re_probe needs at least one sample");
  if (O.empty()) throw InvalidArgument("re_probe needs a nonempty index set");
  const Index p = data.p();
  const auto n = static_cast<double>(data.n());
  const Matrix& X = data.X();

  auto rayleigh = [&](const Vector& v) { return (X * v).squaredNorm() / n / v.squaredNorm(); };

  std::vector<Index> complement;
  for (Index j = 0; j < p; ++j) {
    if (!O.contains(j)) complement.push_back(j);
  }

  ReEstimate est;
  est.kappa_estimate = std::numeric_limits<double>::infinity();

  {
    const Matrix Xo = gather_columns(data, O);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(Xo.transpose() * Xo / n);
    const Vector v = scatter(eig.eigenvectors().col(0), O, p);
    est.kappa_estimate = rayleigh(v);
    est.samples = 1;
  }

  std::mt19937_64 gen(derive_seed(seed, "re_probe"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 1; s < samples; ++s) {
    Vector v = Vector::Zero(p);
    for (const Index j : O) v[j] = normal(gen);
    const double budget = 7.0 * unit(gen) * v.lpNorm<1>();
    if (!complement.empty()) {
      Vector u(static_cast<Index>(complement.size()));
      for (Index k = 0; k < u.size(); ++k) u[k] = normal(gen);
      const double l1 = u.lpNorm<1>();
      if (l1 > 0.0) {
        for (Index k = 0; k < u.size(); ++k) {
          v[complement[static_cast<std::size_t>(k)]] = budget * u[k] / l1;
        }
      }
    }
    if (v.squaredNorm() > 0.0) est.kappa_estimate = std::min(est.kappa_estimate, rayleigh(v));
    ++est.samples;
  }
  return est;
}

BoundCheck check_l2_bound(const CoefficientVector& beta_hat, const CoefficientVector& beta_true,
                          Index n, double K, double kappa_estimate) {
  if (beta_hat.size() != beta_true.size()) throw DimensionMismatch("length mismatch");
  BoundCheck out;
  out.K = K;
  out.kappa_estimate = kappa_estimate;
  out.bound_value = l2_bound(beta_true.nonzeros(), beta_true.size(), n, K);
  out.error = (beta_hat.values() - beta_true.values()).norm();
  out.holds = out.error <= out.bound_value;
  return out;
}

}  // namespace sace
