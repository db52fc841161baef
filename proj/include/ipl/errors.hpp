#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipl {

enum class ErrorKind {
  InvalidInput,
  InvalidConfig,
  InvalidState,
  NoConvergence,
  ContractionViolation,
  SingularResolvent,
  SingularJacobian,
  SingularInformation,
  OracleEvalFailure,
  NumericOverflow,
  RiskSetEmpty,
  DegenerateJump,
  DenominatorCollapse,
  SupportViolation,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI, the Monte Carlo harness) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// NoConvergence additionally reports the best residual seen.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double best_residual)
      : Error(ErrorKind::NoConvergence, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace ipl
