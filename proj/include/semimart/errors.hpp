#pragma once

#include <stdexcept>
#include <string>

namespace semimart {

// Invalid parameters or sizes requested by the caller (e.g. aliasing-prone
// quadrature, too many Fourier coefficients for the grid).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mismatched vector lengths or grid shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace semimart
