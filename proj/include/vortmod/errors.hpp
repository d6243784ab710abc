#pragma once

#include <stdexcept>
#include <string>

namespace vortmod {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Root finder could not establish or shrink a sign-changing bracket.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural property of the modulus construction failed at `step`.
class PropertyViolation : public std::runtime_error {
 public:
  PropertyViolation(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

// Invalid run configuration (bad ranges, malformed config files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Time step too large for the local blob spacing.
class CflViolation : public std::runtime_error {
 public:
  CflViolation(const std::string& what, double suggested_dt)
      : std::runtime_error(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

}  // namespace vortmod
