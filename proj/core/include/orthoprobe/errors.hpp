#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ortho {

/// Invalid experiment or command configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary stream violated a file format; carries the offending byte offset.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Non-finite loss or gradient encountered during optimization. CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ortho
