#pragma once

#include <stdexcept>
#include <string>

namespace qsep {

/// A caller broke a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A protocol emitted more bits than it declared.
class CostViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant did not hold (e.g. a transcript group that is not a
/// rectangle). Always a bug in the protocol model or the library.
class InvariantFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace qsep
