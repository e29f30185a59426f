#pragma once

#include <stdexcept>
#include <string>

namespace bitcap {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An exact computation was asked for beyond its work cap; the caller should
// switch to the bounded path.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No parameter choice satisfies the requested error budgets.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bitcap
