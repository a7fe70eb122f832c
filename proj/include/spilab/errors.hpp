// Exception types shared across the library.
//
// ConfigError marks rejected inputs: malformed files, out-of-range parameters,
// dimension mismatches, violated structural preconditions. The CLI maps it to
// exit code 2. Everything else thrown by the library (std::runtime_error and
// friends) signals an internal failure and maps to exit code 1.

#pragma once

#include <stdexcept>
#include <string>

namespace spilab {

/// Invalid input or configuration. Callers can fix these; the library cannot.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace spilab
