#pragma once

#include <stdexcept>
#include <string>

namespace wpca {

// Precondition violations: bad shapes, invalid parameters, malformed input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failures of a numerical routine on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wpca
