#ifndef NORMTRANS_ERROR_HPP
#define NORMTRANS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace normtrans {

enum class ErrorKind {
  range_not_covered,
  separator_in_word,
  duplicate_codeword,
  empty_codeword,
  bad_suffix_length,
  unknown_symbol,
  unsupported_kind,
  window_too_short,
  negative_coordinate,
  not_irreducible,
  enumeration_budget_exceeded,
  non_canonical_cylinder,
  zero_boundary,
  insufficient_visits,
  invalid_model,
  invalid_argument,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::range_not_covered: return "range-not-covered";
    case ErrorKind::separator_in_word: return "separator-in-word";
    case ErrorKind::duplicate_codeword: return "duplicate-codeword";
    case ErrorKind::empty_codeword: return "empty-codeword";
    case ErrorKind::bad_suffix_length: return "bad-suffix-length";
    case ErrorKind::unknown_symbol: return "unknown-symbol";
    case ErrorKind::unsupported_kind: return "unsupported-kind";
    case ErrorKind::window_too_short: return "window-too-short";
    case ErrorKind::negative_coordinate: return "negative-coordinate";
    case ErrorKind::not_irreducible: return "not-irreducible";
    case ErrorKind::enumeration_budget_exceeded: return "enumeration-budget-exceeded";
    case ErrorKind::non_canonical_cylinder: return "non-canonical-cylinder";
    case ErrorKind::zero_boundary: return "zero-boundary";
    case ErrorKind::insufficient_visits: return "insufficient-visits";
    case ErrorKind::invalid_model: return "invalid-model";
    case ErrorKind::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace normtrans

#endif  // NORMTRANS_ERROR_HPP
