#pragma once

#include <stdexcept>
#include <string>

namespace susyinv {

// Base for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated precondition / argument outside the mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

// A computation failed numerically (non-convergence, overflow, node of a
// Wronskian, degenerate system, ...).
struct NumericError : Error {
  using Error::Error;
};

// Malformed input file or config.  `line` is 0 when not applicable.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line_no = 0)
      : Error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  std::size_t line;
};

}  // namespace susyinv
