#pragma once

#include <stdexcept>
#include <string>

namespace codedgraph {

/// Invalid model or scheme parameters (probabilities out of range, r > K, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. The message carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Caller violated an operation's precondition (wrong group size, non-batch allocation, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A receiver could not reconstruct the sender's table or is missing intermediate values.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant broken (e.g. a sender lacks a map output it should own).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace codedgraph
