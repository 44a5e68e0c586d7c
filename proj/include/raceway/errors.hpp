#pragma once

#include <stdexcept>
#include <string>

namespace raceway {

/// Invalid input: out-of-domain parameter, malformed text, mismatched sizes.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request that is well formed but exceeds a hard cap or a work budget.
class LimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical invariant failed at runtime (box violation, bad residual, ...).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace raceway
