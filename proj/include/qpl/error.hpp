#pragma once

#include <stdexcept>
#include <string>

namespace qpl {

// Invalid parameters or inputs. CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite or otherwise unusable data values.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Singular systems, divergence, NaN losses. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class UnsupportedModeError : public std::logic_error {
 public:
  explicit UnsupportedModeError(const std::string& what) : std::logic_error(what) {}
};

// File system failures. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qpl
