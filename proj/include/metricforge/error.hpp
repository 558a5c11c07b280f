#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metricforge {

// Base of every exception the library throws. Subclasses map one-to-one onto
// the CLI exit codes (see tools/cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input shape, out-of-range parameter, violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Solver breakdown: non-PSD kernel, iteration cap, non-finite values,
// internal consistency checks.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A well-formed file whose contents violate a model invariant (PSD, symmetry).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Requested allocation exceeds a configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace metricforge
