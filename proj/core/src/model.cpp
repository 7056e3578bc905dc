#include "sace/model.hpp"

#include "sace/csv.hpp"
#include "sace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace sace {

SupportSet::SupportSet(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

SupportSet SupportSet::all(Index p) {
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
  return SupportSet(std::move(idx));
}

bool SupportSet::contains(Index j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

bool SupportSet::is_subset_of(const SupportSet& other) const {
  return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                       indices_.end());
}

SupportSet CoefficientVector::support(double tol) const { return extract_support(*this, tol); }

Index CoefficientVector::nonzeros(double tol) const {
  Index count = 0;
  for (Index j = 0; j < values_.size(); ++j) {
    if (std::abs(values_[j]) > tol) ++count;
  }
  return count;
}

Dataset::Dataset(Matrix X, Vector y) : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() != y_.size()) {
    throw DimensionMismatch("X has " + std::to_string(X_.rows()) + " rows but y has " +
                            std::to_string(y_.size()) + " entries");
  }
  if (X_.rows() < 2) throw InvalidArgument("a dataset needs n >= 2 observations");
  if (X_.cols() < 1) throw InvalidArgument("a dataset needs p >= 1 predictors");
  if (!X_.allFinite() || !y_.allFinite()) throw NonFinite();
  col_sq_ = X_.colwise().squaredNorm().transpose();
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  Matrix X(static_cast<Index>(rows.size()), p());
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<Index>(i)) = X_.row(rows[i]);
    y[static_cast<Index>(i)] = y_[rows[i]];
  }
  return Dataset(std::move(X), std::move(y));
}

Dataset Dataset::select_columns(std::span<const Index> cols) const {
  Matrix X(n(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) X.col(static_cast<Index>(k)) = X_.col(cols[k]);
  return Dataset(std::move(X), y_);
}

CoefficientVector StandardizationRecord::to_raw(const CoefficientVector& standardized) const {
  if (standardized.size() != column_scales.size()) {
    throw DimensionMismatch("coefficient length does not match the standardization record");
  }
  return CoefficientVector(standardized.values().cwiseQuotient(column_scales));
}

CoefficientVector StandardizationRecord::to_standardized(const CoefficientVector& raw) const {
  if (raw.size() != column_scales.size()) {
    throw DimensionMismatch("coefficient length does not match the standardization record");
  }
  return CoefficientVector(raw.values().cwiseProduct(column_scales));
}

double StandardizationRecord::intercept(const CoefficientVector& raw) const {
  return y_mean - column_means.dot(raw.values());
}

Vector StandardizationRecord::predict_raw(const Matrix& raw_X,
                                          const CoefficientVector& standardized) const {
  const auto raw = to_raw(standardized);
  if (raw_X.cols() != raw.size()) throw DimensionMismatch("raw_X has the wrong column count");
  return (raw_X * raw.values()).array() + intercept(raw);
}

StandardizedData standardize(const Dataset& raw) {
  const Index n = raw.n();
  const Index p = raw.p();
  if (!raw.X().allFinite() || !raw.y().allFinite()) throw NonFinite();

  StandardizationRecord rec;
  rec.y_mean = raw.y().mean();
  rec.column_means = raw.X().colwise().mean().transpose();
  rec.column_scales.resize(p);

  Matrix X = raw.X().rowwise() - rec.column_means.transpose();
  for (Index j = 0; j < p; ++j) {
    const double scale = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(n));
    const double magnitude = std::max(1.0, std::abs(rec.column_means[j]));
    if (!(scale > 1e-14 * magnitude)) throw ConstantColumn(j);
    rec.column_scales[j] = scale;
    X.col(j) /= scale;
  }
  Vector y = raw.y().array() - rec.y_mean;
  return {Dataset(std::move(X), std::move(y)), std::move(rec)};
}

Vector residual(const Dataset& d, const CoefficientVector& beta) {
  if (beta.size() != d.p()) {
    throw DimensionMismatch("beta has length " + std::to_string(beta.size()) + ", expected " +
                            std::to_string(d.p()));
  }
  return d.y() - d.X() * beta.values();
}

SupportSet extract_support(const CoefficientVector& beta, double tol) {
  std::vector<Index> idx;
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta[j]) > tol) idx.push_back(j);
  }
  return SupportSet(std::move(idx));
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row in " + path.string());
  const auto header = csv::split(line);
  if (header.size() < 2) throw ParseError(1, "need a response column and at least one predictor");
  const std::size_t width = header.size();

  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != width) {
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      const auto v = csv::parse_number(f);
      if (!v) throw ParseError(line_no, "not a number: '" + f + "'");
      values.push_back(*v);
    }
    ++rows;
  }

  const auto n = static_cast<Index>(rows);
  const auto p = static_cast<Index>(width - 1);
  Matrix X(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const auto base = static_cast<std::size_t>(i) * width;
    y[i] = values[base];
    for (Index j = 0; j < p; ++j) X(i, j) = values[base + 1 + static_cast<std::size_t>(j)];
  }
  return Dataset(std::move(X), std::move(y));
}

}  // namespace sace
