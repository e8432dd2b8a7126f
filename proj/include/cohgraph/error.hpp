#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cohgraph {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared in a numeric computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Request outside the supported envelope (e.g. subgraph size above 6).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace cohgraph
