#pragma once

#include <stdexcept>
#include <string>

namespace footwork {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Simulation state went non-finite (unstable parameters or exploding policy).
struct NumericalDivergence : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

/// Backward called with a cache that does not match the parameters.
struct StaleCache : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct ParseError : Error {
  int line = 0;
  ParseError(const std::string& msg, int line_no)
      : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

struct ValidationError : Error {
  using Error::Error;
};

struct VersionMismatch : Error {
  using Error::Error;
};

struct CorruptFile : Error {
  using Error::Error;
};

}  // namespace footwork
