#pragma once

// Error taxonomy. Callers can distinguish bad input, misuse of a valid
// object, snapshot problems, exhausted query budgets, and solver hooks
// that return garbage.

#include <stdexcept>
#include <string>

namespace dpmat {

// Invalid argument: bad dimensions, out-of-range parameters, malformed rows.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Row exceeds the unit norm bound under the reject policy.
class NormViolationError : public InputError {
 public:
  explicit NormViolationError(const std::string& what) : InputError(what) {}
};

// Operation not valid in the current state (e.g. summary of an empty stream).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Snapshot carries an unsupported format version.
class VersionMismatchError : public std::runtime_error {
 public:
  explicit VersionMismatchError(const std::string& what)
      : std::runtime_error(what) {}
};

// Snapshot bytes are truncated or internally inconsistent.
class CorruptPayloadError : public std::runtime_error {
 public:
  explicit CorruptPayloadError(const std::string& what)
      : std::runtime_error(what) {}
};

// A metered query interface has no budget left.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A pluggable solver violated its output contract.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dpmat
