#pragma once

#include <stdexcept>
#include <string>

namespace vdpsync {

/// Failure category, used by the CLI to pick a process exit code.
enum class ErrorKind { Config, Numerical, Convergence };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// A trajectory left the configured amplitude cap; carries the blow-up time.
struct DivergenceError : Error {
  DivergenceError(double t, const std::string& what) : Error(ErrorKind::Numerical, what), time(t) {}
  double time;
};

/// Sign-change search for the shooting parameter exhausted its range.
struct NoBracketError : Error {
  explicit NoBracketError(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

struct SlowConvergenceError : Error {
  explicit SlowConvergenceError(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

struct ContinuityViolationError : Error {
  explicit ContinuityViolationError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct TruncationTooSmallError : Error {
  explicit TruncationTooSmallError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct PositivityLossError : Error {
  PositivityLossError(double t, const std::string& what) : Error(ErrorKind::Numerical, what), time(t) {}
  double time;
};

struct TruncationOverflowError : Error {
  TruncationOverflowError(double t, const std::string& what) : Error(ErrorKind::Numerical, what), time(t) {}
  double time;
};

struct NotConvergedError : Error {
  explicit NotConvergedError(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

struct NeverCrossesError : Error {
  explicit NeverCrossesError(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

struct DomainTooSmallError : Error {
  explicit DomainTooSmallError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct SolverStallError : Error {
  SolverStallError(double t, const std::string& what) : Error(ErrorKind::Numerical, what), time(t) {}
  double time;
};

}  // namespace vdpsync
