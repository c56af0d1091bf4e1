#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace knnshap {

// Bad caller input: wrong flag combinations, unsupported game variants.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent data (non-finite values, ragged rows, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration-based algorithm would exceed its configured work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double estimated, double budget)
      : std::runtime_error(what), estimated_(estimated), budget_(budget) {}

  double estimated() const { return estimated_; }
  double budget() const { return budget_; }

 private:
  double estimated_;
  double budget_;
};

}  // namespace knnshap
