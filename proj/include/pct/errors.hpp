#pragma once

#include <stdexcept>
#include <string>

namespace pct {

// Invalid input values, malformed files, bad configuration. The CLI maps
// these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// File contents that do not parse; the message names the offending row or
// field.
class ParseError : public ValidationError {
 public:
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

// A search exceeded its configured budget. The CLI maps these to exit code 1.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization produced a non-finite objective.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration(iteration) {}

  int iteration;
};

}  // namespace pct
