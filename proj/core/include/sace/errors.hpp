#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFinite : public Error {
 public:
  NonFinite() : Error("input contains NaN or infinite entries") {}
};

class ConstantColumn : public Error {
 public:
  explicit ConstantColumn(Eigen::Index column)
      : Error("column " + std::to_string(column) + " has zero variance"),
        column_(column) {}
  Eigen::Index column() const noexcept { return column_; }

 private:
  Eigen::Index column_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// d outside [0, 1].
class BadD : public InvalidArgument {
 public:
  explicit BadD(double d)
      : InvalidArgument("d must lie in [0, 1], got " + std::to_string(d)) {}
};

/// MCP concavity parameter that makes the coordinate subproblem non-convex.
class BadGamma : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sace
