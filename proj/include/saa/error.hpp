#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace saa {

enum class ErrorKind {
  invalid_argument,
  empty_sample,
  dimension_mismatch,
  budget,
  slater_margin,
  infeasible,
  missing_oracle,
  missing_entry,
  attestation,
  degenerate,
  uncalibratable,
  io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` is what callers dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> required = std::nullopt)
      : std::runtime_error(message), kind_(kind), required_(required) {}

  ErrorKind kind() const noexcept { return kind_; }

  // For budget errors: the number of points/evaluations the request needed.
  std::optional<std::size_t> required() const noexcept { return required_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> required_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace saa
