#pragma once

#include <stdexcept>
#include <string>

namespace tsbreak {

/// Base class for all tsbreak errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (CSV, label file, model file).
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration or precondition violation.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Training produced a non-finite or non-improving objective.
struct TrainingDivergedError : Error {
  explicit TrainingDivergedError(const std::string& msg) : Error(msg) {}
};

}  // namespace tsbreak
