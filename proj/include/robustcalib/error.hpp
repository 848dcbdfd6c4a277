#pragma once

#include <stdexcept>
#include <string>

namespace robustcalib {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller-controlled configuration (grid sizes, step counts) is too small or malformed.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No closed form is available for the requested (family, beta, gamma).
class UnsupportedRegime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// Family metadata disagrees with its own numeric cross-check.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace robustcalib
