#ifndef TRAPPING_ERROR_HPP
#define TRAPPING_ERROR_HPP

#include <stdexcept>
#include <string>

namespace trapping {

/// Bad input to a library call (invalid box, parameters, shapes).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model could not be evaluated at a point, or returned a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trapping

#endif  // TRAPPING_ERROR_HPP
