#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tieeval {

/// Malformed input bytes (run, qrels, logits or report files).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// A well-formed input that violates a precondition (empty list, no
/// relevant items, bad cutoff, NaN score, ...).
class ConstraintError : public std::invalid_argument {
 public:
  explicit ConstraintError(const std::string& what) : std::invalid_argument(what) {}
};

/// Exhaustive enumeration refused because the instance is too large.
class BudgetExceeded : public ConstraintError {
 public:
  explicit BudgetExceeded(const std::string& what) : ConstraintError(what) {}
};

/// Closed-form result disagrees with the exhaustive reference.
class OracleMismatch : public std::runtime_error {
 public:
  explicit OracleMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tieeval
