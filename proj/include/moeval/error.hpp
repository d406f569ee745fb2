#pragma once

#include <stdexcept>
#include <string>

namespace moeval {

// Raised for every domain validation failure (bad input data, broken
// preconditions, malformed files). CLI maps it to exit status 2.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace moeval
