#include "hk/analysis.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <string>

namespace hk {

namespace {

template <OpinionScalar T>
T slack() {
  if constexpr (ScalarTraits<T>::exact) {
    return T(0);
  } else {
    return ScalarTraits<T>::slack;
  }
}

template <OpinionScalar T>
Witness make_witness(const Trajectory<T>& trajectory, std::size_t time, std::vector<std::size_t> agents) {
  Witness w{time, std::move(agents), {}};
  for (std::size_t a : w.agents) w.values.push_back(format_exact(trajectory.states[time].values[a]));
  return w;
}

CheckResult pass(CheckId id, std::string detail = {}) {
  return {std::string(to_string(id)), Verdict::pass, std::move(detail), std::nullopt};
}

CheckResult not_applicable(CheckId id, std::string detail) {
  return {std::string(to_string(id)), Verdict::not_applicable, std::move(detail), std::nullopt};
}

CheckResult fail(CheckId id, std::string detail, Witness witness) {
  return {std::string(to_string(id)), Verdict::fail, std::move(detail), std::move(witness)};
}

template <OpinionScalar T>
std::string show(const T& value) {
  if constexpr (ScalarTraits<T>::exact) {
    std::string text = format_readable(value);
    return text.size() <= 40 ? text : format_decimal(value);
  } else {
    return format_decimal(value);
  }
}

template <OpinionScalar T>
std::optional<std::size_t> fixation_of(const Trajectory<T>& trajectory) {
  if constexpr (ScalarTraits<T>::exact) {
    return detect_fixation(trajectory);
  } else {
    return std::nullopt;
  }
}

// Largest per-agent change over the last `stall_window` transitions is
// within tolerance.
bool numerically_stalled(const Trajectory<double>& trajectory, const AnalysisOptions& options) {
  const std::size_t size = trajectory.size();
  if (size < options.stall_window + 1) return false;
  for (std::size_t t = size - options.stall_window; t < size; ++t) {
    const auto& prev = trajectory.states[t - 1].values;
    const auto& cur = trajectory.states[t].values;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (distance(cur[i], prev[i]) > options.float_tolerance) return false;
    }
  }
  return true;
}

template <OpinionScalar T>
bool converged(const Trajectory<T>& trajectory, const AnalysisOptions& options) {
  if constexpr (ScalarTraits<T>::exact) {
    return detect_fixation(trajectory).has_value();
  } else {
    return numerically_stalled(trajectory, options);
  }
}

template <OpinionScalar T>
std::optional<FrozenBandSummary<T>> frozen_bands(const Trajectory<T>& trajectory, std::size_t window,
                                                 bool strict) {
  if (window < 2) throw UsageError("frozen-band window must be at least 2");
  const std::size_t size = trajectory.size();
  std::size_t start = 0;
  if (size > window) {
    start = size - window;
  } else if (const auto fixed = fixation_of(trajectory)) {
    // The repeated tail stands in for the rest of an unbounded window.
    start = *fixed;
  } else {
    if (strict && trajectory.truncation == Truncation::horizon_reached) {
      throw UsageError("trajectory of " + std::to_string(size) + " states is too short for window " +
                       std::to_string(window));
    }
    return std::nullopt;
  }

  const auto& last = trajectory.back().values;
  const std::size_t n = last.size();
  std::vector<bool> constant(n, true);
  T lowest = last.front();
  T highest = last.front();
  for (std::size_t t = start; t < size; ++t) {
    const auto& values = trajectory.states[t].values;
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i] != last[i]) constant[i] = false;
      if (values[i] < lowest) lowest = values[i];
      if (values[i] > highest) highest = values[i];
    }
  }

  FrozenBandSummary<T> bands{lowest, highest, {}, {}, 0, size - start};
  for (std::size_t i = 0; i < n; ++i) {
    if (!constant[i]) continue;
    if (last[i] == lowest) bands.bottom.push_back(i);
    if (last[i] == highest) bands.top.push_back(i);
  }
  if (bands.bottom.empty() || bands.top.empty()) return std::nullopt;

  std::vector<std::size_t> frozen = bands.bottom;
  frozen.insert(frozen.end(), bands.top.begin(), bands.top.end());
  std::size_t t_star = start;
  while (t_star > 0) {
    const auto& earlier = trajectory.states[t_star - 1].values;
    if (!std::all_of(frozen.begin(), frozen.end(), [&](std::size_t i) { return earlier[i] == last[i]; })) break;
    --t_star;
  }
  bands.t_star = t_star;
  return bands;
}

template <OpinionScalar T>
std::vector<std::size_t> moving_agents(const Trajectory<T>& trajectory) {
  std::vector<std::size_t> out;
  if (trajectory.size() < 2) return out;
  const auto& prev = trajectory.states[trajectory.size() - 2].values;
  const auto& last = trajectory.back().values;
  for (std::size_t i = 0; i < last.size(); ++i) {
    if (prev[i] != last[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> prefix_offsets(std::size_t length) {
  if (length <= 64) {
    std::vector<std::size_t> all(length);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  return {0, length / 4, length / 2, 3 * length / 4, length - 1};
}

}  // namespace

std::string_view to_string(Classification classification) {
  switch (classification) {
    case Classification::finite_time_certified:
      return "finite-time-certified";
    case Classification::numerically_converged:
      return "numerically-converged";
    case Classification::undecided:
      return "undecided";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::not_applicable:
      return "not-applicable";
  }
  return "unknown";
}

namespace {
constexpr std::array kAllChecks = {
    CheckId::monotone_extremes,  CheckId::range_confinement,     CheckId::order_preservation,
    CheckId::cluster_separation, CheckId::theorem1_window,       CheckId::corollary_convergence,
    CheckId::one_step_consensus, CheckId::prefix_averages,
};
}  // namespace

std::string_view to_string(CheckId id) {
  switch (id) {
    case CheckId::monotone_extremes:
      return "monotone-extremes";
    case CheckId::range_confinement:
      return "range-confinement";
    case CheckId::order_preservation:
      return "order-preservation";
    case CheckId::cluster_separation:
      return "cluster-separation";
    case CheckId::theorem1_window:
      return "theorem1-window";
    case CheckId::corollary_convergence:
      return "corollary-convergence";
    case CheckId::one_step_consensus:
      return "one-step-consensus";
    case CheckId::prefix_averages:
      return "prefix-averages";
  }
  return "unknown";
}

CheckId parse_check(std::string_view name) {
  for (CheckId id : kAllChecks) {
    if (to_string(id) == name) return id;
  }
  std::string valid;
  for (CheckId id : kAllChecks) {
    if (!valid.empty()) valid += ", ";
    valid += to_string(id);
  }
  throw UsageError("unknown check '" + std::string(name) + "'; valid checks: " + valid);
}

std::span<const CheckId> all_checks() {
  return kAllChecks;
}

std::string_view CorollaryPrecondition::tag() const noexcept {
  if (spread_small) return "spread-small";
  if (bounds_large) return "bounds-large";
  return "neither";
}

CorollaryPrecondition check_corollary_precondition(const Instance& instance) {
  const auto [lo, hi] = extreme_bounds(instance.initial());
  const Rational& r = instance.profile().r_min();
  return {hi - lo <= 2 * r, r >= Rational(1, 2)};
}

bool is_fixed_point(const OpinionState<Rational>& state, const ConfidenceProfile<Rational>& profile) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::vector<std::size_t> neighbors = neighbor_set(state, profile, i);
    Rational sum = 0;
    for (std::size_t j : neighbors) sum += state.values[j];
    if (sum != state.values[i] * static_cast<unsigned long>(neighbors.size())) return false;
  }
  return true;
}

std::optional<std::size_t> detect_fixation(const Trajectory<Rational>& trajectory) {
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    if (trajectory.states[t].values == trajectory.states[t + 1].values) return t;
  }
  return std::nullopt;
}

template <OpinionScalar T>
ClusterPartition<T> cluster_partition(const OpinionState<T>& state, const T& gap) {
  if (gap < 0) throw UsageError("cluster gap must be nonnegative");
  const auto& x = state.values;
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  ClusterPartition<T> partition{{}, gap};
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || x[order[k]] - x[order[k - 1]] > gap) partition.clusters.push_back({T(0), {}});
    partition.clusters.back().members.push_back(order[k]);
  }
  for (auto& cluster : partition.clusters) {
    T sum = 0;
    for (std::size_t i : cluster.members) sum += x[i];
    if constexpr (ScalarTraits<T>::exact) {
      cluster.value = sum / static_cast<unsigned long>(cluster.members.size());
    } else {
      cluster.value = sum / static_cast<double>(cluster.members.size());
    }
    std::sort(cluster.members.begin(), cluster.members.end());
  }
  return partition;
}

template <OpinionScalar T>
ConvergenceReport<T> classify(const Trajectory<T>& trajectory, const AnalysisOptions& options) {
  if (options.stall_window < 1) throw UsageError("stall window must be at least 1");
  ConvergenceReport<T> report;
  if constexpr (ScalarTraits<T>::exact) {
    report.fixation_time = detect_fixation(trajectory);
    if (report.fixation_time) report.classification = Classification::finite_time_certified;
  } else {
    if (numerically_stalled(trajectory, options)) report.classification = Classification::numerically_converged;
  }
  T gap = 0;
  if (report.classification != Classification::finite_time_certified) {
    gap = from_rational<T>(to_rational(options.float_tolerance)) * static_cast<T>(trajectory.back().size());
  }
  report.partition = cluster_partition(trajectory.back(), gap);
  if (options.window >= 2) report.bands = frozen_bands(trajectory, options.window, false);
  return report;
}

template <OpinionScalar T>
std::optional<FrozenBandSummary<T>> detect_frozen_bands(const Trajectory<T>& trajectory, std::size_t window) {
  return frozen_bands(trajectory, window, true);
}

template <OpinionScalar T>
CheckResult check_monotone_extremes(const Trajectory<T>& trajectory) {
  constexpr CheckId id = CheckId::monotone_extremes;
  const T eps = slack<T>();
  for (std::size_t t = 1; t < trajectory.size(); ++t) {
    const auto& prev = trajectory.states[t - 1].values;
    const auto& cur = trajectory.states[t].values;
    const auto prev_min = std::min_element(prev.begin(), prev.end());
    const auto prev_max = std::max_element(prev.begin(), prev.end());
    const auto cur_min = std::min_element(cur.begin(), cur.end());
    const auto cur_max = std::max_element(cur.begin(), cur.end());
    if (*cur_min < *prev_min - eps) {
      return fail(id, "x_min decreased from " + show(*prev_min) + " to " + show(*cur_min),
                  make_witness(trajectory, t, {static_cast<std::size_t>(cur_min - cur.begin())}));
    }
    if (*cur_max > *prev_max + eps) {
      return fail(id, "x_max increased from " + show(*prev_max) + " to " + show(*cur_max),
                  make_witness(trajectory, t, {static_cast<std::size_t>(cur_max - cur.begin())}));
    }
  }
  return pass(id);
}

template <OpinionScalar T>
CheckResult check_range_confinement(const Trajectory<T>& trajectory) {
  constexpr CheckId id = CheckId::range_confinement;
  const T eps = slack<T>();
  const auto [lo, hi] = extreme_bounds(trajectory.states.front());
  for (std::size_t t = 1; t < trajectory.size(); ++t) {
    const auto& values = trajectory.states[t].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < lo - eps || values[i] > hi + eps) {
        return fail(id, "agent left [" + show(lo) + ", " + show(hi) + "]", make_witness(trajectory, t, {i}));
      }
    }
  }
  return pass(id);
}

template <OpinionScalar T>
CheckResult check_order_preservation(const Trajectory<T>& trajectory, bool require_homogeneous) {
  constexpr CheckId id = CheckId::order_preservation;
  if (require_homogeneous && !trajectory.profile.homogeneous()) {
    return not_applicable(id, "profile is heterogeneous");
  }
  const auto& initial = trajectory.states.front().values;
  std::vector<std::size_t> order(initial.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return initial[a] < initial[b]; });

  for (std::size_t t = 1; t < trajectory.size(); ++t) {
    const auto& values = trajectory.states[t].values;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const std::size_t a = order[k];
      const std::size_t b = order[k + 1];
      // Equal starts must stay equal; strictly ordered starts must stay ordered.
      const bool tied = initial[a] == initial[b];
      if (tied ? values[a] != values[b] : values[a] > values[b]) {
        return fail(id, "agents " + std::to_string(a) + " and " + std::to_string(b) + " changed order",
                    make_witness(trajectory, t, {a, b}));
      }
    }
  }
  return pass(id);
}

template <OpinionScalar T>
CheckResult check_cluster_separation(const Trajectory<T>& trajectory) {
  constexpr CheckId id = CheckId::cluster_separation;
  if (!trajectory.profile.homogeneous()) return not_applicable(id, "profile is heterogeneous");
  if (!fixation_of(trajectory)) return not_applicable(id, "trajectory has no certified fixed point");
  const T& r = trajectory.profile.r_min();
  const ClusterPartition<T> partition = cluster_partition(trajectory.back(), T(0));
  for (std::size_t k = 0; k + 1 < partition.size(); ++k) {
    const auto& lower = partition.clusters[k];
    const auto& upper = partition.clusters[k + 1];
    if (!(upper.value - lower.value > r)) {
      return fail(id, "adjacent clusters " + show(lower.value) + " and " + show(upper.value) + " within r",
                  make_witness(trajectory, trajectory.size() - 1, {lower.members.front(), upper.members.front()}));
    }
  }
  return pass(id, std::to_string(partition.size()) + " cluster(s)");
}

template <OpinionScalar T>
CheckResult check_theorem1_window(const Trajectory<T>& trajectory, std::size_t window,
                                  const AnalysisOptions& options) {
  constexpr CheckId id = CheckId::theorem1_window;
  const auto bands = frozen_bands(trajectory, window, true);
  if (!bands) return not_applicable(id, "no frozen extremes observed within the window");

  const T& r = trajectory.profile.r_min();
  const T spread = bands->c_prime - bands->c;
  if (spread > 2 * r) {
    std::vector<bool> frozen(trajectory.back().size(), false);
    for (std::size_t i : bands->bottom) frozen[i] = true;
    for (std::size_t i : bands->top) frozen[i] = true;
    std::optional<T> low_margin;
    std::optional<T> high_margin;
    for (std::size_t t = trajectory.size() - bands->window; t < trajectory.size(); ++t) {
      const auto& values = trajectory.states[t].values;
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (frozen[k]) continue;
        const T below = values[k] - bands->c;
        const T above = bands->c_prime - values[k];
        if (!(below > r) || !(above > r)) {
          return fail(id, "agent " + std::to_string(k) + " came within r_min of a frozen extreme",
                      make_witness(trajectory, t, {k}));
        }
        if (!low_margin || below < *low_margin) low_margin = below;
        if (!high_margin || above < *high_margin) high_margin = above;
      }
    }
    std::string detail = "branch c: c=" + show(bands->c) + " c'=" + show(bands->c_prime) + " r_min=" + show(r);
    if (low_margin) detail += " min margins " + show(*low_margin) + ", " + show(*high_margin);
    return pass(id, detail);
  }

  const std::size_t frozen_count = bands->bottom.size() + bands->top.size();
  const std::size_t n = trajectory.back().size();
  if constexpr (ScalarTraits<T>::exact) {
    // c == c' lists each agent in both bands.
    const bool everyone = bands->c == bands->c_prime ? bands->bottom.size() == n : frozen_count == n;
    if (detect_fixation(trajectory) && everyone) return pass(id, "branch b: certified fixed point");
  } else {
    if (numerically_stalled(trajectory, options)) return pass(id, "branch b: numerically converged");
  }
  std::vector<std::size_t> moving = moving_agents(trajectory);
  if (moving.empty()) moving.push_back(0);
  return fail(id, "bands within 2 r_min but the run has not converged",
              make_witness(trajectory, trajectory.size() - 1, moving));
}

template <OpinionScalar T>
CheckResult check_corollary_convergence(const Trajectory<T>& trajectory, const AnalysisOptions& options) {
  constexpr CheckId id = CheckId::corollary_convergence;
  const CorollaryPrecondition pre = check_corollary_precondition(trajectory.instance);
  if (!pre.spread_small && !pre.bounds_large) return not_applicable(id, "neither sufficient condition holds");
  if (const auto t = fixation_of(trajectory)) return pass(id, std::string(pre.tag()) + ": fixed at t=" + std::to_string(*t));
  if (!ScalarTraits<T>::exact && converged(trajectory, options)) {
    return pass(id, std::string(pre.tag()) + ": numerically converged");
  }
  std::vector<std::size_t> moving = moving_agents(trajectory);
  if (moving.empty()) moving.push_back(0);
  return fail(id, std::string(pre.tag()) + " instance did not converge within the horizon",
              make_witness(trajectory, trajectory.size() - 1, moving));
}

template <OpinionScalar T>
CheckResult check_one_step_consensus(const Trajectory<T>& trajectory) {
  constexpr CheckId id = CheckId::one_step_consensus;
  const T& r = trajectory.profile.r_min();
  const T eps = slack<T>();
  std::size_t triggered = 0;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const auto& values = trajectory.states[t].values;
    const auto [lo, hi] = extreme_bounds(trajectory.states[t]);
    if (hi - lo > r) continue;
    ++triggered;
    T mean = 0;
    for (const T& v : values) mean += v;
    mean /= static_cast<T>(values.size());
    const auto& next = trajectory.states[t + 1].values;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (distance(next[i], mean) > eps) {
        return fail(id, "spread " + show(T(hi - lo)) + " <= r_min at t=" + std::to_string(t) +
                            " but agent missed the mean " + show(mean),
                    make_witness(trajectory, t + 1, {i}));
      }
    }
  }
  if (triggered == 0) return not_applicable(id, "spread never fell to r_min");
  return pass(id, "triggered at " + std::to_string(triggered) + " step(s)");
}

template <OpinionScalar T>
CheckResult check_prefix_averages(const Trajectory<T>& trajectory) {
  constexpr CheckId id = CheckId::prefix_averages;
  std::vector<Rational> lows;
  std::vector<Rational> highs;
  for (const auto& state : trajectory.states) {
    const auto [lo, hi] = extreme_bounds(state);
    if constexpr (ScalarTraits<T>::exact) {
      lows.push_back(lo);
      highs.push_back(hi);
    } else {
      lows.push_back(to_rational(lo));
      highs.push_back(to_rational(hi));
    }
  }
  if (!std::is_sorted(lows.begin(), lows.end()) || !std::is_sorted(highs.rbegin(), highs.rend())) {
    return not_applicable(id, "extreme sequences are not monotone");
  }
  for (std::size_t m : prefix_offsets(lows.size())) {
    const std::vector<Rational> up = prefix_averages(lows, m);
    if (const auto bad = std::is_sorted_until(up.begin(), up.end()); bad != up.end()) {
      const auto t = m + static_cast<std::size_t>(bad - up.begin());
      return fail(id, "prefix average of x_min decreased at offset " + std::to_string(m),
                  make_witness(trajectory, t, {0}));
    }
    const std::vector<Rational> down = prefix_averages(highs, m);
    if (const auto bad = std::is_sorted_until(down.begin(), down.end(), std::greater<>()); bad != down.end()) {
      const auto t = m + static_cast<std::size_t>(bad - down.begin());
      return fail(id, "prefix average of x_max increased at offset " + std::to_string(m),
                  make_witness(trajectory, t, {0}));
    }
  }
  return pass(id);
}

template <OpinionScalar T>
CheckResult run_check(CheckId id, const Trajectory<T>& trajectory, const AnalysisOptions& options) {
  switch (id) {
    case CheckId::monotone_extremes:
      return check_monotone_extremes(trajectory);
    case CheckId::range_confinement:
      return check_range_confinement(trajectory);
    case CheckId::order_preservation:
      return check_order_preservation(trajectory);
    case CheckId::cluster_separation:
      return check_cluster_separation(trajectory);
    case CheckId::theorem1_window:
      return check_theorem1_window(trajectory, options.window, options);
    case CheckId::corollary_convergence:
      return check_corollary_convergence(trajectory, options);
    case CheckId::one_step_consensus:
      return check_one_step_consensus(trajectory);
    case CheckId::prefix_averages:
      return check_prefix_averages(trajectory);
  }
  throw UsageError("unknown check id");
}

template <OpinionScalar T>
std::vector<CheckResult> run_checks(const Trajectory<T>& trajectory, std::span<const CheckId> ids,
                                    const AnalysisOptions& options) {
  std::vector<CheckResult> out;
  out.reserve(ids.size());
  for (CheckId id : ids) out.push_back(run_check(id, trajectory, options));
  return out;
}

#define HK_INSTANTIATE(T)                                                                                      \
  template ClusterPartition<T> cluster_partition(const OpinionState<T>&, const T&);                           \
  template ConvergenceReport<T> classify(const Trajectory<T>&, const AnalysisOptions&);                       \
  template std::optional<FrozenBandSummary<T>> detect_frozen_bands(const Trajectory<T>&, std::size_t);        \
  template CheckResult check_monotone_extremes(const Trajectory<T>&);                                         \
  template CheckResult check_range_confinement(const Trajectory<T>&);                                         \
  template CheckResult check_order_preservation(const Trajectory<T>&, bool);                                  \
  template CheckResult check_cluster_separation(const Trajectory<T>&);                                        \
  template CheckResult check_theorem1_window(const Trajectory<T>&, std::size_t, const AnalysisOptions&);      \
  template CheckResult check_corollary_convergence(const Trajectory<T>&, const AnalysisOptions&);             \
  template CheckResult check_one_step_consensus(const Trajectory<T>&);                                        \
  template CheckResult check_prefix_averages(const Trajectory<T>&);                                           \
  template CheckResult run_check(CheckId, const Trajectory<T>&, const AnalysisOptions&);                      \
  template std::vector<CheckResult> run_checks(const Trajectory<T>&, std::span<const CheckId>,                \
                                               const AnalysisOptions&);

HK_INSTANTIATE(Rational)
HK_INSTANTIATE(double)

#undef HK_INSTANTIATE

}  // namespace hk
