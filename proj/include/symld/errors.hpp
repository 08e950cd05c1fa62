#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symld {

// Bad input or violated precondition (mismatched alphabets, malformed file, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured resource cap was exceeded (enumeration too large, size unsupported).
class CapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative routine failed to reach its tolerance within its iteration cap.
// Carries the residuals observed at the point of failure.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

// Invalid experiment configuration (schema violation, unknown field, bad flag).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace symld
