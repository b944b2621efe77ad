#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace voxbal {

// All library errors carry a stable machine-readable code ("schema-error",
// "invalid-rate", ...) next to the human-readable message. The CLI maps the
// exception class to its exit code: InputError -> 2, InfeasibleError -> 3,
// anything else -> 1.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Malformed or unusable input: bad containers, schema violations, bad
// parameter values.
class InputError : public Error {
 public:
  using Error::Error;
};

// Structurally valid request that cannot be satisfied for this corpus
// (degenerate strata, unreachable targets).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace voxbal
