#pragma once

// Test-side oracles, written independently of the library kernels.

#include "hk/dynamics.hpp"

#include <random>
#include <string>
#include <vector>

namespace hk::test {

inline Rational q(const char* text) { return parse_rational(text); }

inline std::vector<Rational> qs(std::initializer_list<const char*> items) {
  std::vector<Rational> out;
  for (const char* s : items) out.push_back(parse_rational(s));
  return out;
}

inline Instance make_instance(std::initializer_list<const char*> x, std::initializer_list<const char*> r) {
  return Instance(qs(x), qs(r));
}

/// Direct transcription of the update rule: for every i, average every j
/// with |x_j - x_i| <= r_i.
inline std::vector<Rational> oracle_step(const std::vector<Rational>& x, const std::vector<Rational>& r) {
  std::vector<Rational> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Rational sum = 0;
    long count = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      Rational d = x[j] - x[i];
      if (d < 0) d = -d;
      if (d <= r[i]) {
        sum += x[j];
        ++count;
      }
    }
    next[i] = sum / count;
  }
  return next;
}

/// 9/20 - (1/20)(1/3)^t.
inline Rational asymptotic_closed_form(std::size_t t) {
  mpz_class power;
  mpz_ui_pow_ui(power.get_mpz_t(), 3, static_cast<unsigned long>(t));
  Rational value = Rational(9, 20) - Rational(1, 20) / Rational(power);
  value.canonicalize();
  return value;
}

inline Instance asymptotic_instance() { return make_instance({"0.1", "0.4", "0.8"}, {"0.1", "0.4", "0.1"}); }

/// Random instance with opinions k/grid and bounds in [lo, hi] on a 1/1000 grid.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, int grid, int lo_milli, int hi_milli,
                                bool homogeneous = false) {
  std::uniform_int_distribution<int> opinion(0, grid);
  std::uniform_int_distribution<int> bound(lo_milli, hi_milli);
  std::vector<Rational> x;
  std::vector<Rational> r;
  const int shared = bound(rng);
  for (std::size_t i = 0; i < n; ++i) {
    Rational xi(opinion(rng), grid);
    Rational ri(homogeneous ? shared : bound(rng), 1000);
    xi.canonicalize();
    ri.canonicalize();
    x.push_back(xi);
    r.push_back(ri);
  }
  return Instance(x, r);
}

}  // namespace hk::test
