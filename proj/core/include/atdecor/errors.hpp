#pragma once

#include <stdexcept>
#include <string>

namespace atdecor {

// Raised by the tree DSL, tree JSON and predicate parsers. Line and column
// are 1-based; column 0 means "unknown".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(format(message, line, column)),
        detail_(message),
        line_(line),
        column_(column) {}

  const std::string& detail() const noexcept { return detail_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }

  std::string detail_;
  int line_;
  int column_;
};

// An operation was called on inputs that violate its documented contract
// (duplicate labels, unknown labels, infeasible hard set, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A predicate referenced a label the valuation does not bind.
class UnboundLabelError : public std::out_of_range {
 public:
  explicit UnboundLabelError(const std::string& label)
      : std::out_of_range("unbound label \"" + label + "\""), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

// Evaluation produced NaN or an infinity where a finite value was required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace atdecor
