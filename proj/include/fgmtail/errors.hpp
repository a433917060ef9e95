#pragma once

#include <stdexcept>
#include <string>

namespace fgmtail {

// Argument outside the mathematical domain of an operation (q outside (0,1),
// gamma beyond the abscissa of convergence, beta >= alpha, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two margins carry tail-class tags that cannot be combined.
class ClassMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The requested asymptotic regime is not covered by a proven result.
class UnsupportedBranchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A tail grid does not hold enough probability mass for the requested operation.
class GridCoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid simulation plan or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fgmtail
