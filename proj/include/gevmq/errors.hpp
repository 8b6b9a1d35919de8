#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gevmq {

// Invalid arguments: parameter out of range, malformed triple, too little data.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A fit that could not produce an estimate from the given data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lambda matrix unusable for weighting; caller should draw another triple set.
class RobustnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unparseable input file contents. line is 1-based, 0 when unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gevmq
