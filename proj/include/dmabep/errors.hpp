#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmabep {

// Invalid arguments are reported with std::invalid_argument; the types below
// cover the remaining failure classes.

/// A requested enumeration would exceed the configured memory budget.
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

/// Overflow or NaN in an objective or gradient evaluation.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Input that a projection cannot map onto the feasible set (e.g. zero power).
class DegenerateInput : public std::runtime_error {
 public:
  explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dmabep
