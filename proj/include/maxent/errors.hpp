#pragma once

#include <stdexcept>
#include <string>

namespace maxent {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, violated precondition, bad parameter.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative inner routine hit its round cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// No strictly feasible point could be constructed.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace maxent
