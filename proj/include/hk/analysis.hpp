#pragma once

#include "hk/dynamics.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hk {

template <OpinionScalar T>
struct Cluster {
  T value;  ///< mean of the members' opinions
  std::vector<std::size_t> members;
};

/// Clusters ordered by value; members partition the agents.
template <OpinionScalar T>
struct ClusterPartition {
  std::vector<Cluster<T>> clusters;
  T gap{};

  std::size_t size() const noexcept { return clusters.size(); }
};

/// Agents frozen at the bottom (c) and top (c') extremes over an observed
/// window. Constancy is only verified within the window.
template <OpinionScalar T>
struct FrozenBandSummary {
  T c;
  T c_prime;
  std::vector<std::size_t> bottom;  ///< agents holding c
  std::vector<std::size_t> top;     ///< agents holding c'
  std::size_t t_star = 0;
  std::size_t window = 0;
};

enum class Classification { finite_time_certified, numerically_converged, undecided };

std::string_view to_string(Classification classification);

template <OpinionScalar T>
struct ConvergenceReport {
  Classification classification = Classification::undecided;
  std::optional<std::size_t> fixation_time;
  std::optional<ClusterPartition<T>> partition;
  std::optional<FrozenBandSummary<T>> bands;
  Engine engine = ScalarTraits<T>::engine;
};

enum class Verdict { pass, fail, not_applicable };

std::string_view to_string(Verdict verdict);

/// Where a check failed: the step, the agents involved and their values at
/// that step, printed losslessly so they can be compared with the states.
struct Witness {
  std::size_t time = 0;
  std::vector<std::size_t> agents;
  std::vector<std::string> values;
};

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
  std::string detail;
  std::optional<Witness> witness;
};

enum class CheckId {
  monotone_extremes,
  range_confinement,
  order_preservation,
  cluster_separation,
  theorem1_window,
  corollary_convergence,
  one_step_consensus,
  prefix_averages,
};

std::string_view to_string(CheckId id);
/// Throws UsageError listing the valid names.
CheckId parse_check(std::string_view name);
std::span<const CheckId> all_checks();

struct AnalysisOptions {
  double float_tolerance = 1e-12;
  std::size_t stall_window = 10;
  std::size_t window = 50;
};

/// True iff every agent's neighborhood average equals its own value.
/// Certificates need exact arithmetic; the float overload is deleted.
bool is_fixed_point(const OpinionState<Rational>& state, const ConfidenceProfile<Rational>& profile);
bool is_fixed_point(const OpinionState<double>&, const ConfidenceProfile<double>&) = delete;

/// Smallest t with states[t] == states[t + 1].
std::optional<std::size_t> detect_fixation(const Trajectory<Rational>& trajectory);
std::optional<std::size_t> detect_fixation(const Trajectory<double>&) = delete;

/// Single-linkage on the line: split where sorted neighbors differ by more
/// than `gap`.
template <OpinionScalar T>
ClusterPartition<T> cluster_partition(const OpinionState<T>& state, const T& gap);

template <OpinionScalar T>
ConvergenceReport<T> classify(const Trajectory<T>& trajectory, const AnalysisOptions& options = {});

/// Needs size() > window >= 2. An exact trajectory shorter than that which
/// already repeats is examined from its fixation time, since the fixed
/// state lasts forever; a capped one yields nothing.
template <OpinionScalar T>
std::optional<FrozenBandSummary<T>> detect_frozen_bands(const Trajectory<T>& trajectory, std::size_t window);

template <OpinionScalar T>
CheckResult check_monotone_extremes(const Trajectory<T>& trajectory);

template <OpinionScalar T>
CheckResult check_range_confinement(const Trajectory<T>& trajectory);

/// Not applicable to heterogeneous profiles unless `require_homogeneous`
/// is false.
template <OpinionScalar T>
CheckResult check_order_preservation(const Trajectory<T>& trajectory, bool require_homogeneous = true);

template <OpinionScalar T>
CheckResult check_cluster_separation(const Trajectory<T>& trajectory);

/// If the observed bands are more than 2 r_min apart, every other agent
/// must stay more than r_min from both over the window. Otherwise the run
/// must have converged (certified when exact, numerically when float).
template <OpinionScalar T>
CheckResult check_theorem1_window(const Trajectory<T>& trajectory, std::size_t window,
                                  const AnalysisOptions& options = {});

/// When an instance meets either sufficient condition for finite-time
/// convergence, the run must converge.
template <OpinionScalar T>
CheckResult check_corollary_convergence(const Trajectory<T>& trajectory, const AnalysisOptions& options = {});

/// Spread <= r_min at step t forces consensus at the mean at t + 1.
template <OpinionScalar T>
CheckResult check_one_step_consensus(const Trajectory<T>& trajectory);

/// Prefix averages of the x_min and x_max sequences are monotone in the
/// matching direction.
template <OpinionScalar T>
CheckResult check_prefix_averages(const Trajectory<T>& trajectory);

template <OpinionScalar T>
CheckResult run_check(CheckId id, const Trajectory<T>& trajectory, const AnalysisOptions& options = {});

template <OpinionScalar T>
std::vector<CheckResult> run_checks(const Trajectory<T>& trajectory, std::span<const CheckId> ids,
                                    const AnalysisOptions& options = {});

struct CorollaryPrecondition {
  bool spread_small = false;  ///< x_max(0) - x_min(0) <= 2 r_min
  bool bounds_large = false;  ///< r_min >= 1/2

  /// "spread-small", "bounds-large" or "neither"; spread-small wins when
  /// both hold.
  std::string_view tag() const noexcept;
};

CorollaryPrecondition check_corollary_precondition(const Instance& instance);

}  // namespace hk
