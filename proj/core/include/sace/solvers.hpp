#pragma once

#include "sace/errors.hpp"
#include "sace/model.hpp"
#include "sace/penalties.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sace {

enum class Method { Lasso, ElasticNet, MCP, SACE, GSACE };

std::string_view to_string(Method m);
/// Accepts the CLI spellings lasso, en, mcp, sace, gsace (case-insensitive).
Method parse_method(std::string_view name);

enum class InitSource { LassoSameLambda, McpSameSettings, UserSupplied };

/// The initial estimate b0 feeding the reversed penalty -d b0^T b.
struct InitialEstimate {
  CoefficientVector beta0;
  InitSource source = InitSource::UserSupplied;
  SupportSet support0;

  static InitialEstimate user_supplied(CoefficientVector beta0);
};

/// Stationarity diagnostics of a fit.
///
/// c_j = X_j^T (y - X b) - w b_j + d b0_j, where w is the ridge weight. At a
/// stationary point c_j = pen'(|b_j|) sign(b_j) on the support and |c_j| <= lambda
/// off it. The equicorrelation set is the support plus every inactive coordinate
/// with |c_j| within eq_tol of lambda.
struct KktReport {
  Vector correlations;
  SupportSet equicorrelation_set;
  Vector tau;  ///< length p; sign on the equicorrelation set, 0 elsewhere
  double max_violation = 0.0;
  double eq_tol = 0.0;
};

struct SolverOptions {
  double tol = 1e-8;  ///< max |coefficient change| over a full sweep
  int max_sweeps = 10000;
  double kkt_tol = 1e-6;
  bool record_trace = false;  ///< store the objective after every sweep
};

struct FitResult {
  CoefficientVector beta;
  PenaltySpec spec;
  Method method = Method::Lasso;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  KktReport kkt;
  std::vector<double> objective_trace;
};

/// Raised when the sweep budget runs out. Carries the best iterate.
class NoConvergence : public Error {
 public:
  explicit NoConvergence(FitResult best)
      : Error("coordinate descent did not converge in " + std::to_string(best.iterations) +
              " sweeps"),
        best_(std::move(best)) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Hyperparameters for the generic dispatcher.
struct Hyperparameters {
  double lambda = 0.0;
  double d = 0.0;
  double gamma = 3.0;
  double lambda2 = 0.5;  ///< Elastic Net ridge weight on ||b||^2
};

/// Relative width of the equicorrelation band: max(1e-6 * lambda, 1e-10).
double equicorrelation_tolerance(double lambda);

FitResult fit_lasso(const Dataset& data, double lambda, const CoefficientVector* warm = nullptr,
                    const SolverOptions& opts = {});

/// Naive Elastic Net 1/2||y - Xb||^2 + lambda1 ||b||_1 + lambda2 ||b||^2.
/// lambda2 = 1/2 reproduces the 1/2||b||^2 ridge term of SACE.
FitResult fit_elastic_net(const Dataset& data, double lambda1, double lambda2,
                          const CoefficientVector* warm = nullptr,
                          const SolverOptions& opts = {});

FitResult fit_mcp(const Dataset& data, double lambda, double gamma,
                  const CoefficientVector* warm = nullptr, const SolverOptions& opts = {});

/// Lasso at lambda, packaged as an initial estimate.
InitialEstimate lasso_init(const Dataset& data, double lambda, const CoefficientVector* warm = nullptr,
                           const SolverOptions& opts = {});

/// Plain MCP at (lambda, gamma), packaged as an initial estimate.
InitialEstimate mcp_init(const Dataset& data, double lambda, double gamma,
                         const CoefficientVector* warm = nullptr, const SolverOptions& opts = {});

/// SACE. When init is null, b0 is the Lasso fit at the same lambda.
FitResult fit_sace(const Dataset& data, double lambda, double d,
                   const InitialEstimate* init = nullptr, const CoefficientVector* warm = nullptr,
                   const SolverOptions& opts = {});

/// GSACE. When init is null, b0 is the plain MCP fit at the same (lambda, gamma).
FitResult fit_gsace(const Dataset& data, double lambda, double gamma, double d,
                    const InitialEstimate* init = nullptr, const CoefficientVector* warm = nullptr,
                    const SolverOptions& opts = {});

/// Dispatches on method. For SACE/GSACE a null init is computed at the same settings.
FitResult fit_method(const Dataset& data, Method method, const Hyperparameters& h,
                     const InitialEstimate* init = nullptr,
                     const CoefficientVector* warm = nullptr, const SolverOptions& opts = {});

/// Recomputes the stationarity report for an arbitrary coefficient vector.
KktReport compute_kkt(const Dataset& data, const CoefficientVector& beta, const PenaltySpec& spec,
                      const CoefficientVector& beta0);

/// Stationarity report of a completed fit. init may be null for Lasso/EN/MCP.
KktReport kkt_check(const Dataset& data, const FitResult& fit, const InitialEstimate* init);

/// Solves (X_xi^T X_xi + I) b_xi = X_xi^T y + d b0_xi - lambda tau_xi with zeros off xi.
/// tau has length p.
CoefficientVector explicit_solution_on_set(const Dataset& data, const SupportSet& xi,
                                           double lambda, double d, const Vector& tau,
                                           const InitialEstimate& init);

}  // namespace sace
