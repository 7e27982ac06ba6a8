#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace binmem {

/// Argument outside the mathematical domain of an operation (invalid kernel
/// parameters, times outside [0, T], mismatched table/market shapes).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A theorem-level precondition does not hold, e.g. T >= 1/C for the
/// sufficient no-arbitrage condition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A price factor 1 + b/N + X_n became non-positive: the lattice is outside
/// the regime where it approximates the continuous model.
class NumericalRegimeError : public std::runtime_error {
 public:
  NumericalRegimeError(std::size_t step, double factor)
      : std::runtime_error("non-positive price factor " + std::to_string(factor) +
                           " at step " + std::to_string(step)),
        step_(step),
        factor_(factor) {}

  std::size_t step() const noexcept { return step_; }
  double factor() const noexcept { return factor_; }

 private:
  std::size_t step_;
  double factor_;
};

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of its subdivision budget.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace binmem
