#pragma once

#include "sace/errors.hpp"
#include "sace/model.hpp"
#include "sace/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sace {

class EmptyPanel : public Error {
 public:
  EmptyPanel() : Error("price panel has no usable rows or tickers") {}
};

class NonMonotoneDates : public Error {
 public:
  NonMonotoneDates(std::size_t line, const std::string& date)
      : Error("line " + std::to_string(line) + ": date " + date +
              " does not follow the previous date"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  TooFewSamples() : Error("tracking error needs at least two samples") {}
};

/// Daily prices of m assets and the index they replicate.
struct PricePanel {
  std::vector<std::string> dates;  ///< ISO yyyy-mm-dd, strictly increasing
  std::vector<std::string> tickers;
  Matrix prices;  ///< T x m
  Vector index;   ///< T
  std::vector<std::string> dropped_tickers;

  Index periods() const noexcept { return prices.rows(); }
  Index assets() const noexcept { return prices.cols(); }
};

/// Reads `date,index,ticker1,...,tickerm`. Tickers with any blank cell are
/// dropped and listed in dropped_tickers.
PricePanel load_prices(const std::filesystem::path& path);

void write_prices(const std::filesystem::path& path, const PricePanel& panel);

/// Rows [train_begin, train_begin + train) model, the next `test` rows forecast.
struct WindowSplit {
  int id = 0;
  Index train_begin = 0;
  Index train_rows = 100;
  Index test_rows = 20;

  Index test_begin() const noexcept { return train_begin + train_rows; }
  Index end() const noexcept { return test_begin() + test_rows; }
};

std::vector<WindowSplit> make_windows(Index periods, Index train = 100, Index test = 20,
                                      Index stride = 20);

/// sqrt(250) * sample standard deviation of err.
double tracking_error(const Vector& err);

enum class ErrorMode { Price, Returns };

struct TrackConfig {
  Index k = 50;
  Index train = 100;
  Index test = 20;
  Index stride = 20;
  ErrorMode mode = ErrorMode::Price;
  /// When true, d (SACE/GSACE) and gamma (MCP/GSACE) are chosen by CV on the
  /// training window with the exact-k lambda held fixed.
  bool tune = true;
  std::vector<double> ds{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> gammas{1.5, 3.0, 6.0};
  double d = 0.5;
  double gamma = 3.0;
  double lambda2 = 0.5;
  int cv_folds = 10;
  int max_bisect = 60;
  std::uint64_t seed = 7;
  int jobs = 1;
  SolverOptions solver;
};

struct TrackReport {
  int window = 0;
  Method method = Method::Lasso;
  std::vector<std::string> selected;
  Index cardinality = 0;
  bool exact = false;  ///< false when the closest achievable cardinality was used
  double lambda = 0.0;
  double d = 0.0;
  double gamma = 0.0;
  double fitted_te = 0.0;
  double predicted_te = 0.0;
  Vector fitted;     ///< replication over the training rows
  Vector predicted;  ///< replication over the test rows
  bool failed = false;
  std::string failure;
};

TrackReport track_window(const PricePanel& panel, const WindowSplit& w, Method method,
                         const TrackConfig& cfg);

struct MethodTrackSummary {
  Method method = Method::Lasso;
  double mean_fitted_te = 0.0;
  double max_fitted_te = 0.0;
  double mean_predicted_te = 0.0;
  double max_predicted_te = 0.0;
  int windows = 0;
  int inexact = 0;
  int failures = 0;
};

struct TrackingRun {
  std::vector<WindowSplit> windows;
  std::vector<TrackReport> reports;  ///< window-major, method-minor
  std::vector<MethodTrackSummary> summary;
};

TrackingRun run_tracking(const PricePanel& panel, const std::vector<Method>& methods,
                         const TrackConfig& cfg);

/// reports/windows.csv layout: one row per window x method.
void write_windows_csv(const std::filesystem::path& path, const PricePanel& panel,
                       const TrackingRun& run);
void write_tracking_summary_json(const std::filesystem::path& path, const TrackingRun& run,
                                 const TrackConfig& cfg);
/// Long format (window, method, phase, date, actual, replicated) for plotting.
void write_replication_csv(const std::filesystem::path& path, const PricePanel& panel,
                           const TrackingRun& run);

/// Block-correlated constituents and an index that is a weighted sum of some
/// of them plus noise.
struct SyntheticPanelConfig {
  Index periods = 1160;
  Index assets = 150;
  Index sector_size = 10;
  Index constituents = 80;  ///< the first `constituents` assets carry index weight
  double market_vol = 0.008;
  double sector_vol = 0.012;
  double idio_vol = 0.006;
  double index_noise = 0.5;  ///< absolute noise on the index level
  std::uint64_t seed = 20140102;
};

PricePanel synthetic_panel(const SyntheticPanelConfig& cfg);

}  // namespace sace
