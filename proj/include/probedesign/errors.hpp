#pragma once

#include <stdexcept>
#include <string>

namespace probedesign {

// Parameter outside its admissible range (non-positive dt, alpha outside
// (0,1), ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a covariance needed for a log-determinant is singular.
class SingularCovariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverStatus { kInfeasible, kUnbounded, kMaxIterations, kNumerical };

const char* to_string(SolverStatus status);

class SolverError : public std::runtime_error {
 public:
  SolverError(SolverStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}

  SolverStatus status() const { return status_; }

 private:
  SolverStatus status_;
};

// Randomized search found no feasible input within its sample budget.
class NoFeasibleSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace probedesign
