#pragma once

// Serial implementation that follows the update rule literally: an O(n^2)
// neighbor scan in index order. Kept as the comparison baseline for the
// parallel kernel in tests and benchmarks.

#include "hk/dynamics.hpp"

namespace hk::reference {

template <OpinionScalar T>
OpinionState<T> step(const OpinionState<T>& state, const ConfidenceProfile<T>& profile,
                     const StepOptions& options = {});

template <OpinionScalar T>
Trajectory<T> simulate(const Instance& instance, const SimulateOptions& options);

}  // namespace hk::reference
