#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace coxgibbs {

/// Base class for every runtime failure raised by the library. Invalid
/// arguments are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class SchemaError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "schema_error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  const char* kind() const noexcept override { return "parse_error"; }
  /// 1-based data row (header excluded).
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "insufficient_data"; }
};

class EmptyPairsError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "empty_pairs"; }
};

class PairLimitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "pair_limit"; }
};

class EvaluationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "evaluation_error"; }
};

class SingularHessianError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "singular_hessian"; }
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd last_iterate)
      : Error(what), last_iterate_(std::move(last_iterate)) {}
  const char* kind() const noexcept override { return "non_convergence"; }
  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

 private:
  Eigen::VectorXd last_iterate_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical_error"; }
};

class EssUndefinedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ess_undefined"; }
};

class CalibrationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "calibration_error"; }
};

}  // namespace coxgibbs
