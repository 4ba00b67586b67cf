#pragma once

#include <stdexcept>
#include <string>

namespace fegut {

/// Invalid or inconsistent experiment configuration. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. Carries the 1-based line number where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Cold start could not produce a navigation fix (e.g. fewer than 4 satellites).
class ColdStartError : public std::runtime_error {
 public:
  explicit ColdStartError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fegut
