#pragma once

#include <stdexcept>
#include <string>

namespace vralab {

// Invalid or inconsistent user-supplied configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical quantity left the finite range (NaN or Inf).
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or stream failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vralab
