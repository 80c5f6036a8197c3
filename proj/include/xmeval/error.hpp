#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xmeval {

// Malformed input: bad file syntax, schema violations, inconsistent tables.
// CLI maps this (and std::invalid_argument) to exit code 2.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + (line ? ":" + std::to_string(line) : "") +
                           ": " + what),
        file_(std::move(file)),
        line_(line) {}

  explicit ParseError(const std::string& what) : std::runtime_error(what) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

// Numeric failure: non-convergence, no usable queries, degenerate statistics
// where a scalar answer was required. CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xmeval
