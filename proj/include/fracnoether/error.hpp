#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracnoether {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `position` is the 0-based character offset.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// Evaluation left the real domain (log of non-positive, division by zero, non-finite value).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Input rejected before any computation (bad alpha, observer time, dimensions, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Velocity Hessian could not be inverted.
class SingularHessianError : public Error {
public:
  SingularHessianError(double theta, double condition_estimate)
      : Error("singular velocity Hessian at theta=" + std::to_string(theta) +
              " (condition estimate " + std::to_string(condition_estimate) + ")"),
        theta_(theta), condition_(condition_estimate) {}

  double theta() const noexcept { return theta_; }
  double condition_estimate() const noexcept { return condition_; }

private:
  double theta_;
  double condition_;
};

/// Non-finite state during integration.
class BlowUpError : public Error {
public:
  explicit BlowUpError(double theta)
      : Error("non-finite state at theta=" + std::to_string(theta)), theta_(theta) {}

  double theta() const noexcept { return theta_; }

private:
  double theta_;
};

/// Shooting Newton step could not be solved.
class SingularJacobianError : public Error {
public:
  using Error::Error;
};

/// A charge or check was requested on a problem that does not meet its precondition.
class PreconditionError : public Error {
public:
  using Error::Error;
};

}  // namespace fracnoether
