#pragma once

#include <stdexcept>
#include <string>

namespace lpe {

/// Invalid parameters, malformed config files, grids too small for the request.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operands living on different grids.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/overflow during stepping, CFL refusal, quadrature or iteration failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpe
