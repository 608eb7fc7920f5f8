#include "hk/scalar.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace hk {

namespace {

mpz_class pow10(unsigned long exponent) {
  mpz_class result;
  mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
  return result;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_literal(std::string_view text, const char* why) {
  throw UsageError("invalid number '" + std::string(text) + "': " + why);
}

// Decimal exponent k with 10^k <= a < 10^(k+1), for a > 0.
long decimal_exponent(const Rational& a) {
  const long num_bits = static_cast<long>(mpz_sizeinbase(a.get_num_mpz_t(), 2));
  const long den_bits = static_cast<long>(mpz_sizeinbase(a.get_den_mpz_t(), 2));
  long k = static_cast<long>(std::floor(static_cast<double>(num_bits - den_bits) * 0.30102999566398120));
  auto power = [](long e) {
    return e >= 0 ? Rational(pow10(static_cast<unsigned long>(e))) : Rational(mpz_class(1), pow10(static_cast<unsigned long>(-e)));
  };
  while (power(k) > a) --k;
  while (power(k + 1) <= a) ++k;
  return k;
}

}  // namespace

std::string_view to_string(Engine engine) {
  return engine == Engine::exact ? "exact" : "float";
}

Engine parse_engine(std::string_view name) {
  if (name == "exact") return Engine::exact;
  if (name == "float") return Engine::floating;
  throw UsageError("unknown engine '" + std::string(name) + "' (expected exact or float)");
}

CapacityError::CapacityError(std::size_t agent, std::size_t bits, std::size_t cap)
    : std::runtime_error("denominator of agent " + std::to_string(agent) + " needs " + std::to_string(bits) +
                         " bits, cap is " + std::to_string(cap)),
      agent_(agent),
      bits_(bits) {}

Rational parse_rational(std::string_view raw) {
  const std::string_view text = trim(raw);
  if (text.empty()) bad_literal(raw, "empty");

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view num = trim(text.substr(0, slash));
    const std::string_view den = trim(text.substr(slash + 1));
    bool negative = false;
    if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
      negative = num.front() == '-';
      num.remove_prefix(1);
    }
    if (!all_digits(num) || !all_digits(den)) bad_literal(raw, "expected p/q with integer p and q");
    mpz_class p(std::string(num), 10);
    const mpz_class q(std::string(den), 10);
    if (q == 0) bad_literal(raw, "zero denominator");
    if (negative) p = -p;
    Rational value(p, q);
    value.canonicalize();
    return value;
  }

  std::string_view rest = text;
  bool negative = false;
  if (rest.front() == '-' || rest.front() == '+') {
    negative = rest.front() == '-';
    rest.remove_prefix(1);
  }
  long exponent = 0;
  if (const auto e = rest.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = rest.substr(e + 1);
    rest = rest.substr(0, e);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 5) bad_literal(raw, "bad exponent");
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
  }
  std::string_view int_part = rest;
  std::string_view frac_part;
  if (const auto dot = rest.find('.'); dot != std::string_view::npos) {
    int_part = rest.substr(0, dot);
    frac_part = rest.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) bad_literal(raw, "no digits");
  if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part))) {
    bad_literal(raw, "expected a decimal or p/q literal");
  }
  mpz_class mantissa(std::string(int_part) + std::string(frac_part), 10);
  exponent -= static_cast<long>(frac_part.size());
  Rational value = exponent >= 0 ? Rational(mantissa * pow10(static_cast<unsigned long>(exponent)))
                                 : Rational(mantissa, pow10(static_cast<unsigned long>(-exponent)));
  value.canonicalize();
  if (negative) value = -value;
  return value;
}

double to_double(const Rational& value) {
  const double truncated = value.get_d();
  if (!std::isfinite(truncated)) return truncated;
  const Rational at_truncated(truncated);
  if (at_truncated == value) return truncated;
  const double away = std::nextafter(truncated, value > 0 ? std::numeric_limits<double>::infinity()
                                                           : -std::numeric_limits<double>::infinity());
  if (!std::isfinite(away)) return truncated;
  const Rational err_truncated = distance(value, at_truncated);
  const Rational err_away = distance(value, Rational(away));
  if (err_truncated < err_away) return truncated;
  if (err_away < err_truncated) return away;
  return (std::bit_cast<std::uint64_t>(truncated) & 1U) == 0 ? truncated : away;
}

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw UsageError("non-finite value has no rational form");
  return Rational(value);
}

std::size_t denominator_bits(const Rational& value) {
  return mpz_sizeinbase(value.get_den_mpz_t(), 2);
}

std::string format_decimal(const Rational& value, int digits) {
  if (digits < 1) throw UsageError("digits must be positive");
  if (value == 0) return "0";
  const bool negative = value < 0;
  const Rational magnitude = negative ? Rational(-value) : value;

  long k = decimal_exponent(magnitude);
  const long shift = digits - 1 - k;
  Rational scaled = shift >= 0 ? Rational(magnitude * pow10(static_cast<unsigned long>(shift)))
                               : Rational(magnitude / pow10(static_cast<unsigned long>(-shift)));
  scaled += Rational(1, 2);
  mpz_class rounded;
  mpz_fdiv_q(rounded.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  if (rounded == pow10(static_cast<unsigned long>(digits))) {
    rounded /= 10;
    ++k;
  }
  const std::string body = rounded.get_str();

  std::string out;
  if (k >= 0) {
    const auto int_len = static_cast<std::size_t>(k + 1);
    if (int_len >= body.size()) {
      out = body + std::string(int_len - body.size(), '0');
    } else {
      out = body.substr(0, int_len) + "." + body.substr(int_len);
    }
  } else {
    out = "0." + std::string(static_cast<std::size_t>(-k - 1), '0') + body;
  }
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return negative ? "-" + out : out;
}

std::string format_decimal(double value, int digits) {
  return format_decimal(to_rational(value), digits);
}

std::string format_exact(const Rational& value) {
  return value.get_str();
}

std::string format_exact(double value) {
  return to_rational(value).get_str();
}

std::string format_readable(const Rational& value) {
  mpz_class den = value.get_den();
  unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(2).get_mpz_t());
  unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(5).get_mpz_t());
  if (den != 1) return value.get_str();
  const unsigned long places = std::max(twos, fives);
  if (places == 0) return value.get_str();
  const Rational shifted = value * pow10(places);
  mpz_class digits_value = shifted.get_num();
  const bool negative = digits_value < 0;
  if (negative) digits_value = -digits_value;
  std::string body = digits_value.get_str();
  if (body.size() <= places) body = std::string(places - body.size() + 1, '0') + body;
  body.insert(body.size() - places, ".");
  return negative ? "-" + body : body;
}

}  // namespace hk
