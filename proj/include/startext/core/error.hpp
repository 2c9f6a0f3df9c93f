#pragma once

#include <stdexcept>
#include <string>

namespace startext {

// Bad inputs: malformed configs, contract violations at the API boundary.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures while doing otherwise-valid work (I/O, NaN loss, ...).
// The CLI maps these to exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace startext
