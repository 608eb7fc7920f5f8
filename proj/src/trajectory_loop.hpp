#pragma once

#include "hk/dynamics.hpp"

#include <algorithm>
#include <utility>

namespace hk::detail {

template <OpinionScalar T, class StepFn>
Trajectory<T> run_trajectory(const Instance& instance, const SimulateOptions& options, StepFn&& step_fn) {
  if (options.horizon < 1) throw UsageError("horizon must be at least 1");
  Trajectory<T> trajectory{instance, instance.profile_as<T>(), {}, Truncation::horizon_reached, std::nullopt};
  trajectory.states.reserve(std::min<std::size_t>(options.horizon + 1, 1U << 14));
  trajectory.states.push_back(instance.initial_as<T>());

  // Float rounding can keep a settled state twitching; only exact runs certify.
  const bool certify = options.stop_at_fixed_point && ScalarTraits<T>::exact;
  const StepOptions step_options{options.denominator_cap_bits};
  for (std::size_t t = 0; t < options.horizon; ++t) {
    OpinionState<T> next;
    try {
      next = step_fn(trajectory.states.back(), trajectory.profile, step_options);
    } catch (const CapacityError& e) {
      trajectory.truncation = Truncation::denominator_cap_exceeded;
      trajectory.capped_agent = e.agent();
      return trajectory;
    }
    const bool fixed = certify && next.values == trajectory.states.back().values;
    trajectory.states.push_back(std::move(next));
    if (fixed) {
      trajectory.truncation = Truncation::fixed_point_certified;
      break;
    }
  }
  return trajectory;
}

}  // namespace hk::detail
