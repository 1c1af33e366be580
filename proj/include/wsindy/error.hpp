#pragma once

#include <stdexcept>
#include <string>

namespace wsindy {

// Caller supplied something outside an operation's domain. Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// The numerics failed on valid input. Maps to CLI exit code 1.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SingularSystem : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// A data channel has zero total variation.
class FlatChannel : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class IntegrationFailure : public NumericalError {
public:
  IntegrationFailure(const std::string& what, double t) : NumericalError(what), time_(t) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

}  // namespace wsindy
