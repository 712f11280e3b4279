#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace past {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Solver or estimator failure (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A failure inside one stage of the PAST pipeline, tagged with the stage name
/// ("auxiliary" or "final").
class StageError : public NumericalError {
 public:
  StageError(std::string stage, const std::string& what)
      : NumericalError(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace past
