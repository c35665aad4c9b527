#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sofic {

/// Mismatched groups, out-of-range vertices, wrong element kinds.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input that is well-formed but violates a mathematical precondition
/// (weights that do not sum to one, a non-stationary initial vector, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised instead of truncating an exhaustive scan.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double required, double budget)
      : std::runtime_error(what), required_(required), budget_(budget) {}
  double required() const { return required_; }
  double budget() const { return budget_; }

 private:
  double required_;
  double budget_;
};

/// Operation needs atom identities but the measure is sampler-backed.
class RefusedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sofic
