#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace gplab {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an iterative method fails to reach its target.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when a basis or operator would exceed the configured dimension cap.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw PreconditionError(msg);
}

}  // namespace gplab
