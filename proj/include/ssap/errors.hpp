#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssap {

// Bad numeric parameter (lambda <= 0, lo >= hi, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// R outside 1..N, or a decision query that cannot be satisfied.
class Infeasible : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// CMP normalizer does not converge (nu = 0, lambda >= 1).
class DivergentSeries : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoFeasibleFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TrialFailure : public std::runtime_error {
 public:
  TrialFailure(std::size_t trial, const std::string& what)
      : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}
  std::size_t trial() const noexcept { return trial_; }

 private:
  std::size_t trial_;
};

}  // namespace ssap
