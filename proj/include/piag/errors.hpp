#pragma once

#include <stdexcept>
#include <string>

namespace piag {

/// Raised when caller-supplied data violates an operation's preconditions.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// The reference solver could not certify an optimum.
class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

/// A PIAG run blew past the divergence guard; the step size is unstable.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace piag
