#pragma once

#include "sace/model.hpp"
#include "sace/solvers.hpp"
#include "sace/tuning.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sace {

enum class Example { Ex1, Ex2 };
/// Covariance of Example 1's tail predictors.
enum class TailCovariance { Identity, AR05 };
enum class BetaMode { Const3, Unif05_1 };

/// One simulation setting. Defaults match the n = 50, p = 400, q = 15 design.
struct ScenarioConfig {
  Example example = Example::Ex1;
  Index n = 50;
  Index p = 400;
  Index q = 15;
  TailCovariance tail = TailCovariance::Identity;
  double group_noise_sd = 0.01;  ///< Example 1 only: sd of e_i in X_i = Z_g + e_i
  double equicorrelation = 0.1;  ///< Example 2 only
  BetaMode beta_mode = BetaMode::Const3;
  double noise_sigma = 0.4;
  int reps = 100;
  std::uint64_t seed = 20240101;

  // Tuning knobs.
  int n_lambda = 50;
  double lambda_min_ratio = 0.01;
  int folds = 10;
  double small_fraction = 0.75;
};

/// Case 1-4 of each example: Ex1 varies (sigma, tail covariance) over
/// {0.4, 2} x {I, AR(0.5)}; Ex2 varies (sigma, beta) over {0.4, 2} x {3, U[0.5, 1]}.
ScenarioConfig scenario_case(Example example, int case_number);

/// Parses key=value lines (# comments allowed) on top of `base`.
/// Keys: example, case, n, p, q, tail, group_noise_sd, equicorrelation, beta, sigma, reps, seed,
/// n_lambda, lambda_min_ratio, folds, small_fraction.
ScenarioConfig parse_scenario_config(const std::string& text, ScenarioConfig base = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path, ScenarioConfig base = {});
std::string to_key_value(const ScenarioConfig& cfg);

struct SimulatedData {
  Dataset data;  ///< raw (not standardized)
  CoefficientVector beta;
};

/// Columns 1-15 are three groups X_i = Z_g + e_i, e_i ~ N(0, group_noise_sd^2);
/// the rest follow N(0, Sigma). beta is nonzero on the first q coordinates.
SimulatedData gen_example1(const ScenarioConfig& cfg, std::uint64_t rep_seed);

/// All columns equicorrelated at cfg.equicorrelation.
SimulatedData gen_example2(const ScenarioConfig& cfg, std::uint64_t rep_seed);

SimulatedData generate(const ScenarioConfig& cfg, std::uint64_t rep_seed);

struct MetricRow {
  std::string method;
  double l2_error = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  bool thresholded = false;
};

MetricRow compute_metrics(const CoefficientVector& beta_hat, const CoefficientVector& beta_true);

/// Averages over replications for one method.
struct MethodSummary {
  Method method = Method::Lasso;
  MetricRow mean;
  MetricRow std_err;
  MetricRow mean_thresholded;
  MetricRow std_err_thresholded;
  int completed = 0;
  int failures = 0;
};

struct ReplicationFit {
  Method method = Method::Lasso;
  Hyperparameters params;
  CoefficientVector beta;  ///< raw scale
  CoefficientVector beta_thresholded;
  bool failed = false;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<MethodSummary> summaries;
  /// Per replication, per method (same order as summaries).
  std::vector<std::vector<ReplicationFit>> fits;
  std::vector<CoefficientVector> truths;
};

struct RunOptions {
  int jobs = 1;
  SolverOptions solver;
};

/// For each replication: generate, standardize, cross-validate, refit on all
/// data at the chosen cell, map back to the raw scale, optionally threshold,
/// score. Replication r uses seed derive_seed(cfg.seed, "rep", r).
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::vector<Method>& methods,
                            bool with_threshold, const RunOptions& opts = {});

/// Long-format (method, index, estimate, truth) records for coefficient plots.
struct ProfileRecord {
  std::string method;
  Index index = 0;
  double estimate = 0.0;
  double truth = 0.0;
};

/// One block per method plus a "truth" block whose estimate equals the truth.
std::vector<ProfileRecord> export_estimate_profile(
    const std::vector<std::pair<std::string, CoefficientVector>>& fits,
    const CoefficientVector& beta_true);

void write_profile_csv(const std::filesystem::path& path, const std::vector<ProfileRecord>& rows);
std::vector<ProfileRecord> read_profile_csv(const std::filesystem::path& path);

/// Table-style CSV: one row per method with raw and thresholded metrics.
void write_scenario_table(const std::filesystem::path& path, const ScenarioResult& result);

}  // namespace sace
