#pragma once

#include <stdexcept>
#include <string>

namespace qmult {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A parameter outside its admissible range, or malformed input text.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

// Enumeration would visit more work units than the configured budget.
class BudgetExceeded : public Error {
  public:
    BudgetExceeded(const std::string& what, double required, double budget)
        : Error(what + ": needs " + std::to_string(required) + " work units, budget is " +
                std::to_string(budget)),
          required_(required),
          budget_(budget) {}

    double required() const { return required_; }
    double budget() const { return budget_; }

  private:
    double required_;
    double budget_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// Raised when an internal consistency check fails (e.g. a Gowers inner
// average that should be a nonnegative real is not).
class InternalError : public Error {
  public:
    using Error::Error;
};

}  // namespace qmult
