#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace efrel {

enum class ErrorKind {
  non_representable,
  invalid_witness,
  degenerate_input,
  infeasible,
  not_invertible,
  search_exhausted,
  precondition_violated,
  zero_denominator,
  cap_exceeded,
  window_too_small,
  zero_set_ambiguous,
  negative_increment,
  order_violation,
  parse_error,
  range_error,
  io_error,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. `index` carries the level/offset
// payload some kinds have (Infeasible(n), NegativeIncrement(n), byte offset
// of a ParseError, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::int64_t> index = std::nullopt)
      : std::runtime_error(what), kind_(kind), index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::int64_t> index() const noexcept { return index_; }

  // Same kind and payload, message prefixed with `context`.
  Error with_context(const std::string& context) const {
    return Error(kind_, context + ": " + what(), index_);
  }

 private:
  ErrorKind kind_;
  std::optional<std::int64_t> index_;
};

}  // namespace efrel
