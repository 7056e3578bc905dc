#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <vector>

namespace sace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Ordered, duplicate-free set of predictor indices (0-based).
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::vector<Index> indices);

  static SupportSet all(Index p);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index j) const;
  bool is_subset_of(const SupportSet& other) const;

  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

/// Regression coefficients. The support is always recomputed from the values.
class CoefficientVector {
 public:
  CoefficientVector() = default;
  explicit CoefficientVector(Vector values) : values_(std::move(values)) {}

  static CoefficientVector zeros(Index p) { return CoefficientVector(Vector::Zero(p)); }

  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index j) const { return values_[j]; }

  SupportSet support(double tol = 0.0) const;
  Index nonzeros(double tol = 0.0) const;

 private:
  Vector values_;
};

/// Design matrix and response. Entries are finite, n >= 2 and p >= 1.
class Dataset {
 public:
  Dataset(Matrix X, Vector y);

  const Matrix& X() const noexcept { return X_; }
  const Vector& y() const noexcept { return y_; }
  Index n() const noexcept { return X_.rows(); }
  Index p() const noexcept { return X_.cols(); }

  /// X_j^T X_j for every column.
  const Vector& column_sq_norms() const noexcept { return col_sq_; }

  Dataset select_rows(std::span<const Index> rows) const;
  Dataset select_columns(std::span<const Index> cols) const;

 private:
  Matrix X_;
  Vector y_;
  Vector col_sq_;
};

/// Moments needed to map coefficients between raw and standardized scales.
struct StandardizationRecord {
  double y_mean = 0.0;
  Vector column_means;
  Vector column_scales;

  CoefficientVector to_raw(const CoefficientVector& standardized) const;
  CoefficientVector to_standardized(const CoefficientVector& raw) const;
  /// Intercept on the raw scale for raw-scale coefficients.
  double intercept(const CoefficientVector& raw) const;
  /// Predictions on the raw scale from standardized-scale coefficients.
  Vector predict_raw(const Matrix& raw_X, const CoefficientVector& standardized) const;
};

struct StandardizedData {
  Dataset data;
  StandardizationRecord record;
};

/// Centers y, centers every column of X and scales it so that (1/n) X_j^T X_j = 1.
StandardizedData standardize(const Dataset& raw);

/// y - X beta.
Vector residual(const Dataset& d, const CoefficientVector& beta);

/// {j : |beta_j| > tol}.
SupportSet extract_support(const CoefficientVector& beta, double tol);

/// Reads a CSV whose first column is the response and the rest predictors.
/// A header row is required.
Dataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace sace
