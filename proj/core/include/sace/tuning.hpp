#pragma once

#include "sace/model.hpp"
#include "sace/solvers.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace sace {

/// Hyperparameter grid. lambdas are strictly decreasing; ds, gammas and
/// lambda2s are only consulted by the methods that use them.
struct Grid {
  std::vector<double> lambdas;
  std::vector<double> ds;
  std::vector<double> gammas;
  std::vector<double> lambda2s;
};

/// max_j |X_j^T y|: the smallest lambda at which Lasso returns zero.
double lambda_max(const Dataset& data);

std::vector<double> default_d_grid();        ///< 0, 0.1, ..., 1
std::vector<double> default_gamma_grid();    ///< 1.5, 3, 6
std::vector<double> default_lambda2_grid();  ///< 0.5, 2.5, 12.5

/// Log-spaced lambdas from lambda_max down to lambda_max * lambda_min_ratio.
/// Empty ds / gammas fall back to the defaults.
Grid make_grid(const Dataset& data, int n_lambda = 50, double lambda_min_ratio = 0.01,
               std::vector<double> ds = {}, std::vector<double> gammas = {});

struct CvCell {
  Hyperparameters params;
  double mean_error = 0.0;  ///< mean over folds of held-out mean squared error
  double std_error = 0.0;   ///< standard deviation across folds
  int failures = 0;         ///< folds whose fit did not converge
};

struct CvResult {
  Method method = Method::Lasso;
  std::vector<CvCell> table;
  CvCell best;
  int folds = 10;
  std::uint64_t seed = 0;
};

struct CvOptions {
  int folds = 10;
  int jobs = 1;
  SolverOptions solver;
  /// Called with (fold, cell, fit) for every training-fold fit. Invoked from
  /// worker threads when jobs > 1.
  std::function<void(int, const Hyperparameters&, const FitResult&)> observer;
};

/// Fold id for every row: a seeded shuffle dealt round-robin into k folds.
std::vector<int> make_folds(Index n, int k, std::uint64_t seed);

/// K-fold cross-validation over the grid. Folds are min(opts.folds, n). Lambda
/// paths are warm-started within each fold and the initial estimate for
/// SACE/GSACE is refit inside the training fold at every candidate lambda
/// (and gamma). The best cell minimizes mean error; ties go to the larger
/// lambda, then the smaller d.
CvResult cross_validate(const Dataset& data, Method method, const Grid& grid, std::uint64_t seed,
                        const CvOptions& opts = {});

/// Refit on all of `data` by walking grid.lambdas from the top down to
/// h.lambda with warm starts, the same way each CV fold reached that cell.
/// For MCP and GSACE this selects the same local minimum CV scored.
FitResult fit_on_path(const Dataset& data, Method method, const Grid& grid,
                      const Hyperparameters& h, const SolverOptions& opts = {});

struct ThresholdRule {
  double sigma_hat = 0.0;
  double cutoff = 0.0;
  double small_fraction = 0.75;
};

/// Zeroes |b_j| <= sigma_hat sqrt(2 ln p), where sigma_hat is the sample standard
/// deviation of the coefficients whose magnitude is at or below the
/// small_fraction quantile of all magnitudes.
std::pair<CoefficientVector, ThresholdRule> apply_threshold(const CoefficientVector& beta, Index p,
                                                            double small_fraction = 0.75);

struct ExactKResult {
  double lambda = 0.0;
  FitResult fit;
  Index cardinality = 0;
  bool exact = false;
};

/// Raised when bisection cannot hit the requested cardinality. Carries the
/// closest fit found.
class Unachievable : public Error {
 public:
  Unachievable(Index k, ExactKResult closest)
      : Error("no lambda selects exactly " + std::to_string(k) + " predictors (closest: " +
              std::to_string(closest.cardinality) + ")"),
        k_(k),
        closest_(std::move(closest)) {}
  Index k() const noexcept { return k_; }
  const ExactKResult& closest() const noexcept { return closest_; }

 private:
  Index k_;
  ExactKResult closest_;
};

/// Bisection on log lambda between lambda_max (nothing selected) and a small
/// lambda (at least k selected) until the fit has exactly k nonzeros.
/// h.lambda is ignored; h.d, h.gamma and h.lambda2 are used as given.
ExactKResult select_exact_k(const Dataset& data, Method method, Index k,
                            const Hyperparameters& h, int max_bisect = 60,
                            const SolverOptions& opts = {});

}  // namespace sace
