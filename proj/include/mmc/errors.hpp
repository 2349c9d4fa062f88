#pragma once

#include <stdexcept>
#include <string>

namespace mmc {

/// Bad user input: malformed configuration, unknown key, out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular stiffness, failed residual check, infeasible optimizer subproblem.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmc
