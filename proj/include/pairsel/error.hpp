#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pairsel {

/// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorKind { Usage, Data, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad arguments: violated preconditions, out-of-range parameters.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Problems with the input data itself (parse failures, no complete cases, degenerate folds).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Solver failures. Carries the last iterate and its KKT residual so callers can inspect them.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::vector<double> last_iterate = {},
                 double residual = 0.0, std::vector<double> trace = {})
      : Error(ErrorKind::Numerical, what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        trace_(std::move(trace)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  std::vector<double> trace_;
};

}  // namespace pairsel
