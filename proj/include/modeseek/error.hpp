#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modeseek {

/// Bad arguments: shape mismatches, out-of-range parameters, malformed files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation requested for a kernel that does not support it
/// (e.g. the Hessian of an Epanechnikov KDE).
class UnsupportedKernelError : public InputError {
 public:
  using InputError::InputError;
};

/// An iteration or root search could not produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Epanechnikov mean-shift query with no data point inside its window.
class IsolatedPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Entropic-affinity bisection could not bracket the target perplexity.
class NoSolutionError : public NumericalError {
 public:
  NoSolutionError(std::size_t point, const std::string& what)
      : NumericalError("point " + std::to_string(point) + ": " + what), point_(point) {}

  std::size_t point() const noexcept { return point_; }

 private:
  std::size_t point_;
};

/// Conditional density has no mass at the query (all weights underflow).
class OutOfSupportError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace modeseek
