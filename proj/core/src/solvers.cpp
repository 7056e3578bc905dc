#include "sace/solvers.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace sace {
namespace {

// Minimizer of 1/2 a b^2 - z b + pen(|b|) for one coordinate, where
// a = X_j^T X_j + ridge and z = X_j^T r_{-j} + d b0_j.
double coordinate_update(const PenaltySpec& spec, double z, double a, double n) {
  if (spec.family == PenaltyFamily::L1) return soft_threshold(z, spec.lambda) / a;
  if (spec.lambda <= 0.0) return z / a;
  const double kink = spec.gamma * spec.lambda / n;
  const double inner = soft_threshold(z, spec.lambda) / (a - n / spec.gamma);
  return std::abs(inner) <= kink ? inner : z / a;
}

constexpr int kPolishEvery = 50;

struct CdState {
  Vector beta;
  Vector r;
};

FitResult coordinate_descent(const Dataset& data, Method method, const PenaltySpec& spec,
                             const CoefficientVector& beta0, const CoefficientVector* warm,
                             const SolverOptions& opts) {
  spec.validate(data.n());
  const Index p = data.p();
  const auto n = static_cast<double>(data.n());
  const Matrix& X = data.X();
  const Vector& col_sq = data.column_sq_norms();

  Vector shift = Vector::Zero(p);
  if (spec.d != 0.0) {
    if (beta0.size() != p) throw DimensionMismatch("initial estimate has the wrong length");
    shift = spec.d * beta0.values();
  }

  CdState s;
  if (warm != nullptr) {
    if (warm->size() != p) throw DimensionMismatch("warm start has the wrong length");
    s.beta = warm->values();
  } else {
    s.beta = Vector::Zero(p);
  }

  FitResult result;
  result.spec = spec;
  result.method = method;

  auto sweep = [&](auto&& indices) {
    double max_change = 0.0;
    for (const Index j : indices) {
      const double a = col_sq[j] + spec.ridge_weight;
      if (a <= 0.0) continue;  // zero column without ridge: coefficient stays put
      const double old = s.beta[j];
      const double z = X.col(j).dot(s.r) + col_sq[j] * old + shift[j];
      const double updated = coordinate_update(spec, z, a, n);
      if (updated != old) {
        s.r.noalias() -= (updated - old) * X.col(j);
        s.beta[j] = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    return max_change;
  };

  auto current_objective = [&] {
    return objective(data, CoefficientVector(s.beta), spec, beta0);
  };

  // With signs (and MCP regions) frozen the objective is quadratic on the
  // active set. Step toward that quadratic's minimizer, stopping at the first
  // coordinate that would cross zero or the MCP kink, then repeat on the
  // reduced pattern. Each accepted step must lower the objective.
  const double kink = spec.family == PenaltyFamily::MCP && spec.lambda > 0.0
                          ? spec.gamma * spec.lambda / n
                          : 0.0;
  auto polish_once = [&](const std::vector<Index>& act) {
    const auto m = static_cast<Index>(act.size());
    if (m == 0) return false;
    if (spec.ridge_weight <= 0.0 && m > data.n()) return false;
    Matrix XA(data.n(), m);
    Vector rhs(m);
    std::vector<bool> inner(act.size(), spec.family == PenaltyFamily::L1);
    for (Index c = 0; c < m; ++c) {
      const Index j = act[static_cast<std::size_t>(c)];
      XA.col(c) = X.col(j);
      if (spec.family == PenaltyFamily::MCP) inner[c] = std::abs(s.beta[j]) <= kink;
    }
    Matrix H = XA.transpose() * XA;
    rhs.noalias() = XA.transpose() * data.y();
    for (Index c = 0; c < m; ++c) {
      const Index j = act[static_cast<std::size_t>(c)];
      H(c, c) += spec.ridge_weight;
      rhs[c] += shift[j];
      if (inner[c]) {
        rhs[c] -= spec.lambda * (s.beta[j] > 0.0 ? 1.0 : -1.0);
        if (spec.family == PenaltyFamily::MCP) H(c, c) -= n / spec.gamma;
      }
    }
    Eigen::LDLT<Matrix> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const Vector sol = ldlt.solve(rhs);
    if (!sol.allFinite()) return false;

    // Largest step in [0, 1] that keeps every coordinate in its piece.
    double step = 1.0;
    Index blocking = -1;
    double snap = 0.0;
    for (Index c = 0; c < m; ++c) {
      const Index j = act[static_cast<std::size_t>(c)];
      const double from = s.beta[j];
      const double to = sol[c];
      const double sgn = from > 0.0 ? 1.0 : -1.0;
      const double boundary = spec.family == PenaltyFamily::MCP ? sgn * kink : 0.0;
      double t = 2.0;
      if (to * sgn <= 0.0) t = from / (from - to);
      if (spec.family == PenaltyFamily::MCP) {
        const bool crosses = inner[c] ? std::abs(to) > kink : std::abs(to) <= kink;
        if (crosses && to * sgn > 0.0) t = (boundary - from) / (to - from);
      }
      if (t < step) {
        step = t;
        blocking = c;
        snap = (to * sgn <= 0.0) ? 0.0 : boundary;
      }
    }
    Vector candidate = s.beta;
    for (Index c = 0; c < m; ++c) {
      const Index j = act[static_cast<std::size_t>(c)];
      candidate[j] = s.beta[j] + step * (sol[c] - s.beta[j]);
    }
    if (blocking >= 0) candidate[act[static_cast<std::size_t>(blocking)]] = snap;
    const double before = current_objective();
    const double after = objective(data, CoefficientVector(candidate), spec, beta0);
    if (!(after < before)) return false;
    s.beta = std::move(candidate);
    s.r = data.y() - X * s.beta;
    return blocking < 0;
  };
  auto polish = [&](std::vector<Index> act) {
    for (std::size_t round = 0; round <= act.size() + 1; ++round) {
      std::erase_if(act, [&](Index j) { return s.beta[j] == 0.0; });
      const auto before = s.beta;
      if (polish_once(act) || s.beta == before) return;
    }
  };

  std::vector<Index> all(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
  std::vector<Index> active;
  active.reserve(all.size());

  double tol = opts.tol;
  int sweeps = 0;
  bool converged = false;
  while (sweeps < opts.max_sweeps) {
    // Refresh the residual on every full pass so rounding cannot accumulate.
    s.r = data.y() - X * s.beta;
    const double full_change = sweep(all);
    ++sweeps;
    if (opts.record_trace) result.objective_trace.push_back(current_objective());

    if (full_change <= tol) {
      const auto kkt = compute_kkt(data, CoefficientVector(s.beta), spec, beta0);
      if (kkt.max_violation <= opts.kkt_tol) {
        converged = true;
        break;
      }
      if (tol <= 1e-15) break;
      tol = std::max(tol * 1e-2, 1e-15);
      continue;
    }

    active.clear();
    for (Index j = 0; j < p; ++j) {
      if (s.beta[j] != 0.0) active.push_back(j);
    }
    for (int inner_sweeps = 1; sweeps < opts.max_sweeps; ++inner_sweeps) {
      const double change = sweep(active);
      ++sweeps;
      if (opts.record_trace) result.objective_trace.push_back(current_objective());
      if (change <= tol) break;
      if (inner_sweeps % kPolishEvery == 0) {
        polish(active);
        break;
      }
    }
  }

  result.beta = CoefficientVector(std::move(s.beta));
  result.iterations = sweeps;
  result.objective = objective(data, result.beta, spec, beta0);
  result.kkt = compute_kkt(data, result.beta, spec, beta0);
  result.converged = converged;
  if (!converged) throw NoConvergence(std::move(result));
  return result;
}

InitialEstimate make_init(CoefficientVector beta0, InitSource source) {
  InitialEstimate init;
  init.support0 = beta0.support();
  init.beta0 = std::move(beta0);
  init.source = source;
  return init;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Lasso: return "lasso";
    case Method::ElasticNet: return "en";
    case Method::MCP: return "mcp";
    case Method::SACE: return "sace";
    case Method::GSACE: return "gsace";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lasso") return Method::Lasso;
  if (lower == "en" || lower == "elasticnet" || lower == "elastic-net") return Method::ElasticNet;
  if (lower == "mcp") return Method::MCP;
  if (lower == "sace") return Method::SACE;
  if (lower == "gsace") return Method::GSACE;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

InitialEstimate InitialEstimate::user_supplied(CoefficientVector beta0) {
  return make_init(std::move(beta0), InitSource::UserSupplied);
}

double equicorrelation_tolerance(double lambda) { return std::max(1e-6 * lambda, 1e-10); }

KktReport compute_kkt(const Dataset& data, const CoefficientVector& beta, const PenaltySpec& spec,
                      const CoefficientVector& beta0) {
  const Index p = data.p();
  KktReport report;
  report.correlations = data.X().transpose() * residual(data, beta) -
                        spec.ridge_weight * beta.values();
  if (spec.d != 0.0) report.correlations += spec.d * beta0.values();
  report.tau = Vector::Zero(p);
  report.eq_tol = equicorrelation_tolerance(spec.lambda);

  std::vector<Index> xi;
  double worst = 0.0;
  for (Index j = 0; j < p; ++j) {
    const double c = report.correlations[j];
    const double b = beta[j];
    if (b != 0.0) {
      const double sgn = b > 0.0 ? 1.0 : -1.0;
      const double target = penalty_derivative(spec, b, data.n()) * sgn;
      worst = std::max(worst, std::abs(c - target));
      xi.push_back(j);
      report.tau[j] = sgn;
    } else {
      worst = std::max(worst, std::abs(c) - spec.lambda);
      if (std::abs(c) >= spec.lambda - report.eq_tol) {
        xi.push_back(j);
        report.tau[j] = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
      }
    }
  }
  report.max_violation = std::max(worst, 0.0);
  report.equicorrelation_set = SupportSet(std::move(xi));
  return report;
}

KktReport kkt_check(const Dataset& data, const FitResult& fit, const InitialEstimate* init) {
  if (fit.beta.size() != data.p()) throw DimensionMismatch("fit does not match the dataset");
  if (fit.spec.d != 0.0 && init == nullptr) {
    throw InvalidArgument("an initial estimate is required when d != 0");
  }
  return compute_kkt(data, fit.beta, fit.spec, init ? init->beta0 : CoefficientVector());
}

FitResult fit_lasso(const Dataset& data, double lambda, const CoefficientVector* warm,
                    const SolverOptions& opts) {
  PenaltySpec spec{PenaltyFamily::L1, lambda, 0.0, 0.0, 0.0};
  return coordinate_descent(data, Method::Lasso, spec, {}, warm, opts);
}

FitResult fit_elastic_net(const Dataset& data, double lambda1, double lambda2,
                          const CoefficientVector* warm, const SolverOptions& opts) {
  if (!(lambda2 >= 0.0)) throw InvalidArgument("lambda2 must be nonnegative");
  PenaltySpec spec{PenaltyFamily::L1, lambda1, 0.0, 0.0, 2.0 * lambda2};
  return coordinate_descent(data, Method::ElasticNet, spec, {}, warm, opts);
}

FitResult fit_mcp(const Dataset& data, double lambda, double gamma, const CoefficientVector* warm,
                  const SolverOptions& opts) {
  PenaltySpec spec{PenaltyFamily::MCP, lambda, gamma, 0.0, 0.0};
  return coordinate_descent(data, Method::MCP, spec, {}, warm, opts);
}

InitialEstimate lasso_init(const Dataset& data, double lambda, const CoefficientVector* warm,
                           const SolverOptions& opts) {
  return make_init(fit_lasso(data, lambda, warm, opts).beta, InitSource::LassoSameLambda);
}

InitialEstimate mcp_init(const Dataset& data, double lambda, double gamma,
                         const CoefficientVector* warm, const SolverOptions& opts) {
  return make_init(fit_mcp(data, lambda, gamma, warm, opts).beta, InitSource::McpSameSettings);
}

FitResult fit_sace(const Dataset& data, double lambda, double d, const InitialEstimate* init,
                   const CoefficientVector* warm, const SolverOptions& opts) {
  if (!(d >= 0.0 && d <= 1.0)) throw BadD(d);
  InitialEstimate own;
  if (init == nullptr) {
    own = lasso_init(data, lambda, nullptr, opts);
    init = &own;
  }
  PenaltySpec spec{PenaltyFamily::L1, lambda, 0.0, d, 1.0};
  return coordinate_descent(data, Method::SACE, spec, init->beta0, warm, opts);
}

FitResult fit_gsace(const Dataset& data, double lambda, double gamma, double d,
                    const InitialEstimate* init, const CoefficientVector* warm,
                    const SolverOptions& opts) {
  if (!(d >= 0.0 && d <= 1.0)) throw BadD(d);
  PenaltySpec spec{PenaltyFamily::MCP, lambda, gamma, d, 1.0};
  spec.validate(data.n());
  InitialEstimate own;
  if (init == nullptr) {
    own = mcp_init(data, lambda, gamma, nullptr, opts);
    init = &own;
  }
  return coordinate_descent(data, Method::GSACE, spec, init->beta0, warm, opts);
}

FitResult fit_method(const Dataset& data, Method method, const Hyperparameters& h,
                     const InitialEstimate* init, const CoefficientVector* warm,
                     const SolverOptions& opts) {
  switch (method) {
    case Method::Lasso: return fit_lasso(data, h.lambda, warm, opts);
    case Method::ElasticNet: return fit_elastic_net(data, h.lambda, h.lambda2, warm, opts);
    case Method::MCP: return fit_mcp(data, h.lambda, h.gamma, warm, opts);
    case Method::SACE: return fit_sace(data, h.lambda, h.d, init, warm, opts);
    case Method::GSACE: return fit_gsace(data, h.lambda, h.gamma, h.d, init, warm, opts);
  }
  throw InvalidArgument("unknown method");
}

CoefficientVector explicit_solution_on_set(const Dataset& data, const SupportSet& xi,
                                           double lambda, double d, const Vector& tau,
                                           const InitialEstimate& init) {
  const Index p = data.p();
  if (tau.size() != p || init.beta0.size() != p) {
    throw DimensionMismatch("tau and b0 must have length p");
  }
  Vector beta = Vector::Zero(p);
  if (xi.empty()) return CoefficientVector(std::move(beta));

  const Index q = xi.size();
  Matrix Xs(data.n(), q);
  Vector rhs(q);
  for (Index k = 0; k < q; ++k) {
    const Index j = xi.indices()[static_cast<std::size_t>(k)];
    Xs.col(k) = data.X().col(j);
    rhs[k] = d * init.beta0[j] - lambda * tau[j];
  }
  rhs.noalias() += Xs.transpose() * data.y();
  Matrix gram = Xs.transpose() * Xs;
  gram.diagonal().array() += 1.0;
  const Vector sol = gram.llt().solve(rhs);
  for (Index k = 0; k < q; ++k) beta[xi.indices()[static_cast<std::size_t>(k)]] = sol[k];
  return CoefficientVector(std::move(beta));
}

}  // namespace sace
