#include "hk/reference.hpp"

#include "trajectory_loop.hpp"

namespace hk::reference {

template <OpinionScalar T>
OpinionState<T> step(const OpinionState<T>& state, const ConfidenceProfile<T>& profile, const StepOptions& options) {
  const std::size_t n = state.size();
  if (profile.size() != n) throw UsageError("state and profile sizes differ");
  OpinionState<T> next{std::vector<T>(n), state.time + 1};
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::size_t> neighbors = neighbor_set(state, profile, i);
    T sum = 0;
    for (std::size_t j : neighbors) sum += state.values[j];
    if constexpr (ScalarTraits<T>::exact) {
      sum /= static_cast<unsigned long>(neighbors.size());
      if (denominator_bits(sum) > options.denominator_cap_bits) {
        throw CapacityError(i, denominator_bits(sum), options.denominator_cap_bits);
      }
      next.values[i] = sum;
    } else {
      next.values[i] = sum / static_cast<double>(neighbors.size());
    }
  }
  return next;
}

template <OpinionScalar T>
Trajectory<T> simulate(const Instance& instance, const SimulateOptions& options) {
  return detail::run_trajectory<T>(instance, options, [](const OpinionState<T>& s, const ConfidenceProfile<T>& p,
                                                         const StepOptions& o) { return reference::step(s, p, o); });
}

template OpinionState<Rational> step(const OpinionState<Rational>&, const ConfidenceProfile<Rational>&,
                                     const StepOptions&);
template OpinionState<double> step(const OpinionState<double>&, const ConfidenceProfile<double>&,
                                   const StepOptions&);
template Trajectory<Rational> simulate(const Instance&, const SimulateOptions&);
template Trajectory<double> simulate(const Instance&, const SimulateOptions&);

}  // namespace hk::reference
