#pragma once

#include <stdexcept>
#include <string>

namespace bps {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameters violating a documented invariant (degenerate couplings,
// bad multiplicities, mismatched domains, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// A vortex point sits on a grid node or outside the domain.
class PlacementError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

// Torus data violating the solvability condition when not forced.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const { return line_; }

private:
  int line_;
};

} // namespace bps
