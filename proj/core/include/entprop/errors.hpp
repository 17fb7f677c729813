#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entprop {

/// Base class for every error raised by the library. `code()` is a short
/// machine-parsable identifier (e.g. "E_DIMENSION") used by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string_view code, const std::string& what);
  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("E_DIMENSION", what) {}
};

class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(const std::string& what) : Error("E_SINGULAR", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("E_FORMAT", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("E_IO", what) {}
};

class StatsError : public Error {
 public:
  explicit StatsError(const std::string& what) : Error("E_STATS", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("E_CONFIG", what) {}
};

}  // namespace entprop
