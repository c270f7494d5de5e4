#pragma once

#include <stdexcept>
#include <string>

namespace fracspde {

// Bad user input: parameters out of range, mismatched dimensions, unknown keys.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct dimension_error : config_error {
  using config_error::config_error;
};

// Every grid point had psi = 0, so no ratio could be formed.
struct degenerate_grid_error : config_error {
  using config_error::config_error;
};

// A computation that could not deliver a trustworthy number.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fracspde
