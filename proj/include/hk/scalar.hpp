#pragma once

#include <gmpxx.h>

#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hk {

/// Exact opinion value. Always canonical (lowest terms, positive denominator).
using Rational = mpq_class;

/// Arithmetic used by a run. A trajectory never mixes the two.
enum class Engine { exact, floating };

std::string_view to_string(Engine engine);
Engine parse_engine(std::string_view name);

/// Bad input or a violated precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exact value outgrew the configured denominator cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(std::size_t agent, std::size_t bits, std::size_t cap);

  std::size_t agent() const noexcept { return agent_; }
  std::size_t bits() const noexcept { return bits_; }

 private:
  std::size_t agent_;
  std::size_t bits_;
};

template <class T>
concept OpinionScalar = std::same_as<T, Rational> || std::same_as<T, double>;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr Engine engine = Engine::exact;
  static constexpr bool exact = true;
};

template <>
struct ScalarTraits<double> {
  static constexpr Engine engine = Engine::floating;
  static constexpr bool exact = false;
  /// Tolerance for order relations that hold exactly in real arithmetic.
  static constexpr double slack = 0x1p-40;
};

/// Parses "p/q", an integer, or a decimal literal ("0.125", ".5", "1e-3").
/// Decimals convert exactly, so "0.1" is 1/10.
Rational parse_rational(std::string_view text);

/// Nearest double, ties to even. mpq_get_d truncates, which is not enough
/// for a faithful float run from a rational config.
double to_double(const Rational& value);

/// Exact rational value of a binary64.
Rational to_rational(double value);

template <OpinionScalar T>
T from_rational(const Rational& value) {
  if constexpr (std::same_as<T, Rational>) {
    return value;
  } else {
    return to_double(value);
  }
}

/// Bit length of the denominator.
std::size_t denominator_bits(const Rational& value);

/// Decimal rounded half-away-from-zero to `digits` significant digits,
/// printed in positional notation with trailing zeros removed.
std::string format_decimal(const Rational& value, int digits = 17);
std::string format_decimal(double value, int digits = 17);

/// Lossless text: "p/q" ("p" for integers). Doubles print their exact
/// binary value.
std::string format_exact(const Rational& value);
std::string format_exact(double value);

/// Finite decimal when the denominator is 2^a 5^b, otherwise "p/q".
std::string format_readable(const Rational& value);

template <OpinionScalar T>
T distance(const T& a, const T& b) {
  T d = a - b;
  if (d < 0) d = -d;
  return d;
}

}  // namespace hk
