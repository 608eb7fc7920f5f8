#pragma once

#include "hk/scalar.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hk {

/// Per-agent confidence bounds, each in (0, 1].
template <OpinionScalar T>
class ConfidenceProfile {
 public:
  ConfidenceProfile() = default;
  /// Throws UsageError unless the list is nonempty with every bound in (0, 1].
  explicit ConfidenceProfile(std::vector<T> bounds);

  std::span<const T> bounds() const noexcept { return bounds_; }
  const T& operator[](std::size_t i) const { return bounds_[i]; }
  std::size_t size() const noexcept { return bounds_.size(); }
  const T& r_min() const noexcept { return r_min_; }
  bool homogeneous() const noexcept { return homogeneous_; }

  friend bool operator==(const ConfidenceProfile&, const ConfidenceProfile&) = default;

 private:
  std::vector<T> bounds_;
  T r_min_{};
  bool homogeneous_ = true;
};

template <OpinionScalar T>
struct OpinionState {
  std::vector<T> values;
  std::size_t time = 0;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const OpinionState&, const OpinionState&) = default;
};

/// Initial opinions and confidence bounds. Stored exactly; a run converts
/// to its engine's scalar on entry.
class Instance {
 public:
  /// Throws UsageError on empty or mismatched lists, opinions outside
  /// [0, 1], or bounds outside (0, 1].
  Instance(std::vector<Rational> opinions, std::vector<Rational> bounds, std::string label = {});

  const OpinionState<Rational>& initial() const noexcept { return initial_; }
  const ConfidenceProfile<Rational>& profile() const noexcept { return profile_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return initial_.size(); }

  template <OpinionScalar T>
  OpinionState<T> initial_as() const;
  template <OpinionScalar T>
  ConfidenceProfile<T> profile_as() const;

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  OpinionState<Rational> initial_;
  ConfidenceProfile<Rational> profile_;
  std::string label_;
};

enum class Truncation { horizon_reached, fixed_point_certified, denominator_cap_exceeded };

std::string_view to_string(Truncation truncation);

template <OpinionScalar T>
struct Trajectory {
  static constexpr Engine engine = ScalarTraits<T>::engine;

  Instance instance;
  ConfidenceProfile<T> profile;
  std::vector<OpinionState<T>> states;
  Truncation truncation = Truncation::horizon_reached;
  /// Set when truncation is denominator_cap_exceeded.
  std::optional<std::size_t> capped_agent;

  const OpinionState<T>& back() const { return states.back(); }
  std::size_t size() const noexcept { return states.size(); }
};

inline constexpr std::size_t kDefaultDenominatorCapBits = 4096;

/// max(1000, 10 n^3).
std::size_t default_horizon(std::size_t agents);

struct StepOptions {
  std::size_t denominator_cap_bits = kDefaultDenominatorCapBits;
};

struct SimulateOptions {
  std::size_t horizon = 1000;
  bool stop_at_fixed_point = true;
  std::size_t denominator_cap_bits = kDefaultDenominatorCapBits;
};

/// Agents j with |x_j - x_i| <= r_i, ascending. Always contains i.
template <OpinionScalar T>
std::vector<std::size_t> neighbor_set(const OpinionState<T>& state, const ConfidenceProfile<T>& profile,
                                      std::size_t agent);

/// One synchronous update. Neighborhoods are intervals in sorted order, so
/// the kernel sorts once, locates each interval by binary search and
/// averages it; agents are processed in parallel for large n. Exact runs
/// throw CapacityError naming the lowest offending agent.
template <OpinionScalar T>
OpinionState<T> step(const OpinionState<T>& state, const ConfidenceProfile<T>& profile,
                     const StepOptions& options = {});

/// Iterates step up to `horizon` times. With the exact engine and
/// stop_at_fixed_point, stops once step(x) == x, keeping the repeated
/// state as the last entry. A capacity error ends the run early and is
/// reported through Trajectory::truncation.
template <OpinionScalar T>
Trajectory<T> simulate(const Instance& instance, const SimulateOptions& options);

template <OpinionScalar T>
struct Extremes {
  T min;
  T max;
};

template <OpinionScalar T>
Extremes<T> extreme_bounds(const OpinionState<T>& state);

/// g_m(k) = (z_{m+1} + ... + z_{m+k}) / k for k = 1 .. size - m, with z
/// indexed from 1. Monotone input gives monotone output.
std::vector<Rational> prefix_averages(std::span<const Rational> z, std::size_t offset);

}  // namespace hk
