#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semiclassical {

enum class ErrorKind {
  OutOfDomain,
  Shape,
  InvalidArgument,
  InvalidHorizon,
  Singularity,
  Convergence,
  Stability,
  TemporalResolution,
  Resolution,
  BoundaryBreach,
  DegenerateState,
  Sampling,
  StatisticalPower,
  DomainSize,
  Parse,
  Validation,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; the kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::Convergence, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace semiclassical
