#include "hk/dynamics.hpp"
#include "hk/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

// Random opinions on a 1/1000 grid with bounds in [0.05, 0.3].
hk::Instance bench_instance(std::size_t n) {
  std::mt19937_64 rng(0x5eed + n);
  std::uniform_int_distribution<int> opinion(0, 1000);
  std::uniform_int_distribution<int> bound(50, 300);
  std::vector<hk::Rational> x;
  std::vector<hk::Rational> r;
  for (std::size_t i = 0; i < n; ++i) {
    x.emplace_back(opinion(rng), 1000);
    r.emplace_back(bound(rng), 1000);
  }
  for (auto& v : x) v.canonicalize();
  for (auto& v : r) v.canonicalize();
  return hk::Instance(x, r, "bench");
}

template <typename T, bool Reference>
void BM_Step(benchmark::State& bench) {
  const hk::Instance instance = bench_instance(static_cast<std::size_t>(bench.range(0)));
  const auto profile = instance.profile_as<T>();
  const auto state = instance.initial_as<T>();
  for (auto _ : bench) {
    if constexpr (Reference) {
      benchmark::DoNotOptimize(hk::reference::step(state, profile));
    } else {
      benchmark::DoNotOptimize(hk::step(state, profile));
    }
  }
  bench.SetComplexityN(bench.range(0));
}

}  // namespace

BENCHMARK(BM_Step<double, true>)->Name("float/reference")->Arg(16)->Arg(128)->Arg(1024);
BENCHMARK(BM_Step<double, false>)->Name("float/parallel")->Arg(16)->Arg(128)->Arg(1024);
BENCHMARK(BM_Step<hk::Rational, true>)->Name("exact/reference")->Arg(16)->Arg(128)->Arg(1024);
BENCHMARK(BM_Step<hk::Rational, false>)->Name("exact/parallel")->Arg(16)->Arg(128)->Arg(1024);

BENCHMARK_MAIN();
