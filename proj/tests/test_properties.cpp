#include "hk/analysis.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace hk;

TEST_CASE("random exact runs satisfy every structural check") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const bool homogeneous = trial % 3 == 0;
    const Instance inst = hk::test::random_instance(rng, 1 + rng() % 12, 200, 50, 500, homogeneous);
    const auto traj = simulate<Rational>(inst, {400, true, kDefaultDenominatorCapBits});
    for (const auto& result : run_checks(traj, all_checks())) {
      CAPTURE(trial);
      CAPTURE(result.name);
      CAPTURE(result.detail);
      CHECK(result.verdict != Verdict::fail);
    }
  }
}

TEST_CASE("random float runs satisfy the structural checks") {
  std::mt19937_64 rng(22);
  const CheckId ids[] = {CheckId::monotone_extremes, CheckId::range_confinement, CheckId::order_preservation,
                         CheckId::one_step_consensus};
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = hk::test::random_instance(rng, 2 + rng() % 30, 1000, 50, 500, trial % 2 == 0);
    const auto traj = simulate<double>(inst, {100, false, kDefaultDenominatorCapBits});
    for (const auto& result : run_checks(traj, ids)) {
      CAPTURE(result.name);
      CHECK(result.verdict != Verdict::fail);
    }
  }
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    const Instance inst = hk::test::random_instance(rng, n, 100, 50, 400);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Rational> px(n);
    std::vector<Rational> pr(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = inst.initial().values[perm[i]];
      pr[i] = inst.profile()[perm[i]];
    }
    const auto a = simulate<Rational>(inst, {50, false, kDefaultDenominatorCapBits});
    const auto b = simulate<Rational>(Instance(px, pr), {50, false, kDefaultDenominatorCapBits});
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      for (std::size_t i = 0; i < n; ++i) REQUIRE(b.states[t].values[i] == a.states[t].values[perm[i]]);
    }
  }
}

TEST_CASE("prefix averages of monotone sequences are monotone") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng() % 40;
    std::vector<Rational> z(len);
    Rational acc(static_cast<long>(rng() % 10), 7);
    for (auto& v : z) {
      acc += Rational(static_cast<long>(rng() % 5), 3);
      v = acc;
    }
    if (trial % 2) std::reverse(z.begin(), z.end());
    for (std::size_t m = 0; m < len; ++m) {
      const auto g = prefix_averages(z, m);
      for (std::size_t k = 1; k < g.size(); ++k) {
        if (trial % 2) {
          CHECK(g[k] <= g[k - 1]);
        } else {
          CHECK(g[k] >= g[k - 1]);
        }
      }
    }
  }
}

TEST_CASE("simulation is deterministic") {
  std::mt19937_64 rng(25);
  const Instance inst = hk::test::random_instance(rng, 300, 1000, 20, 200);
  const auto a = simulate<Rational>(inst, {40, true, kDefaultDenominatorCapBits});
  const auto b = simulate<Rational>(inst, {40, true, kDefaultDenominatorCapBits});
  CHECK(a.states == b.states);
  const auto fa = simulate<double>(inst, {40, false, kDefaultDenominatorCapBits});
  const auto fb = simulate<double>(inst, {40, false, kDefaultDenominatorCapBits});
  CHECK(fa.states == fb.states);
}
