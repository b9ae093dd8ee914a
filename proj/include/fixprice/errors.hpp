#pragma once

#include <stdexcept>
#include <string>

namespace fixprice {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An integral or moment that does not exist (e.g. the mean of a Pareto
/// with shape at most one).
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative routine ran out of budget. The best estimate reached so far is
/// attached so callers may still inspect it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

/// maximize_1d found no variation across its bracketing scan.
class FlatFunctionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// find_root was given a bracket whose endpoints have the same sign.
class NoSignChangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input (distribution strings, CSV files, CLI values).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fixprice
