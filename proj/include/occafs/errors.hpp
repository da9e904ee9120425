#pragma once

#include <stdexcept>
#include <string>

namespace occafs {

// Bad user input: unreadable or malformed files, parameters out of range,
// data violating a documented assumption.
struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown while computing: degenerate denominators, singular
// regularizer terms, undefined residuals, failed factorizations.
struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

// A property the solver guarantees failed at runtime. Indicates a bug in the
// implementation, not bad data.
struct InvariantViolation : std::logic_error {
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace occafs
