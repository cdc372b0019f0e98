#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace oblivgm {

enum class PredicateKind : std::uint8_t { Equal = 0, Less = 1, LessEq = 2, Greater = 3, GreaterEq = 4, Interval = 5 };

std::string_view to_string(PredicateKind kind);

/// A private predicate over dictionary indices. Range kinds are normalised to
/// index bounds so that every kind reduces to at most two prefix thresholds:
///   Equal:              x == lo
///   Less, LessEq:       x <  hi
///   Greater, GreaterEq: x >= lo
///   Interval:           lo <= x < hi
struct PredicateSpec {
  PredicateKind kind = PredicateKind::Equal;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool lower_closed = true;
  bool upper_closed = true;

  static PredicateSpec equal(std::uint64_t a);
  static PredicateSpec less(std::uint64_t a);
  static PredicateSpec less_eq(std::uint64_t a);
  static PredicateSpec greater(std::uint64_t a);
  static PredicateSpec greater_eq(std::uint64_t a);
  /// [a, a'] by default; open ends shift the bounds inward. a > a' is rejected.
  static PredicateSpec interval(std::uint64_t a, std::uint64_t a_prime, bool lower_closed = true,
                                bool upper_closed = true);

  bool matches(std::uint64_t x) const;
  /// Throws ValidationError if the operands do not fit a dictionary of `domain_size` entries.
  void validate(std::uint64_t domain_size) const;

  friend bool operator==(const PredicateSpec&, const PredicateSpec&) = default;
};

}  // namespace oblivgm
