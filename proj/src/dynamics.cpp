#include "hk/dynamics.hpp"

#include "trajectory_loop.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>

namespace hk {

namespace {

// Below this size the fork/join overhead dominates the update.
constexpr std::size_t kParallelThreshold = 256;

template <OpinionScalar T>
std::vector<std::size_t> sorted_order(const std::vector<T>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

OpinionState<Rational> step_exact(const OpinionState<Rational>& state, const ConfidenceProfile<Rational>& profile,
                                  const StepOptions& options) {
  const std::vector<Rational>& x = state.values;
  const std::size_t n = x.size();
  const std::vector<std::size_t> order = sorted_order(x);

  std::vector<Rational> prefix(n + 1);
  prefix[0] = 0;
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + x[order[k]];

  OpinionState<Rational> next{std::vector<Rational>(n), state.time + 1};
  std::vector<std::size_t> overflow_bits(n, 0);

#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t signed_i = 0; signed_i < static_cast<std::ptrdiff_t>(n); ++signed_i) {
    const auto i = static_cast<std::size_t>(signed_i);
    const Rational low = x[i] - profile[i];
    const Rational high = x[i] + profile[i];
    const auto first = std::partition_point(order.begin(), order.end(),
                                            [&](std::size_t j) { return x[j] < low; });
    const auto last = std::partition_point(first, order.end(), [&](std::size_t j) { return x[j] <= high; });
    const auto lo = static_cast<std::size_t>(first - order.begin());
    const auto hi = static_cast<std::size_t>(last - order.begin());
    Rational value = prefix[hi] - prefix[lo];
    value /= static_cast<unsigned long>(hi - lo);
    const std::size_t bits = denominator_bits(value);
    if (bits > options.denominator_cap_bits) overflow_bits[i] = bits;
    next.values[i] = std::move(value);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (overflow_bits[i] != 0) throw CapacityError(i, overflow_bits[i], options.denominator_cap_bits);
  }
  return next;
}

OpinionState<double> step_float(const OpinionState<double>& state, const ConfidenceProfile<double>& profile) {
  const std::vector<double>& x = state.values;
  const std::size_t n = x.size();
  const std::vector<std::size_t> order = sorted_order(x);

  OpinionState<double> next{std::vector<double>(n), state.time + 1};

#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t signed_i = 0; signed_i < static_cast<std::ptrdiff_t>(n); ++signed_i) {
    const auto i = static_cast<std::size_t>(signed_i);
    const double xi = x[i];
    const double r = profile[i];
    // Same closed test as |x_j - x_i| <= r_i; rounded subtraction is
    // monotone, so the neighborhood stays contiguous in sorted order.
    const auto first = std::partition_point(order.begin(), order.end(), [&](std::size_t j) {
      return x[j] < xi && xi - x[j] > r;
    });
    const auto last = std::partition_point(first, order.end(), [&](std::size_t j) {
      return x[j] <= xi || x[j] - xi <= r;
    });
    double sum = 0.0;
    for (auto it = first; it != last; ++it) sum += x[*it];
    next.values[i] = sum / static_cast<double>(last - first);
  }
  return next;
}

}  // namespace

template <OpinionScalar T>
ConfidenceProfile<T>::ConfidenceProfile(std::vector<T> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw UsageError("confidence profile is empty");
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (!(bounds_[i] > 0) || bounds_[i] > 1) {
      throw UsageError("bounds[" + std::to_string(i) + "] = " + format_decimal(bounds_[i]) +
                       " is outside (0, 1]: confidence bounds must be positive and at most 1");
    }
  }
  r_min_ = *std::min_element(bounds_.begin(), bounds_.end());
  homogeneous_ = std::all_of(bounds_.begin(), bounds_.end(), [&](const T& r) { return r == bounds_.front(); });
}

Instance::Instance(std::vector<Rational> opinions, std::vector<Rational> bounds, std::string label)
    : initial_{std::move(opinions), 0}, profile_(std::move(bounds)), label_(std::move(label)) {
  if (initial_.values.empty()) throw UsageError("instance has no opinions");
  if (initial_.size() != profile_.size()) {
    throw UsageError("opinions has " + std::to_string(initial_.size()) + " entries but bounds has " +
                     std::to_string(profile_.size()));
  }
  for (std::size_t i = 0; i < initial_.size(); ++i) {
    const Rational& v = initial_.values[i];
    if (v < 0 || v > 1) {
      throw UsageError("opinions[" + std::to_string(i) + "] = " + format_readable(v) + " is outside [0, 1]");
    }
  }
}

template <OpinionScalar T>
OpinionState<T> Instance::initial_as() const {
  if constexpr (std::same_as<T, Rational>) {
    return initial_;
  } else {
    OpinionState<T> out{{}, initial_.time};
    out.values.reserve(initial_.size());
    for (const Rational& v : initial_.values) out.values.push_back(from_rational<T>(v));
    return out;
  }
}

template <OpinionScalar T>
ConfidenceProfile<T> Instance::profile_as() const {
  if constexpr (std::same_as<T, Rational>) {
    return profile_;
  } else {
    std::vector<T> bounds;
    bounds.reserve(profile_.size());
    for (const Rational& r : profile_.bounds()) bounds.push_back(from_rational<T>(r));
    return ConfidenceProfile<T>(std::move(bounds));
  }
}

std::string_view to_string(Truncation truncation) {
  switch (truncation) {
    case Truncation::horizon_reached:
      return "horizon-reached";
    case Truncation::fixed_point_certified:
      return "fixed-point-certified";
    case Truncation::denominator_cap_exceeded:
      return "denominator-cap-exceeded";
  }
  return "unknown";
}

std::size_t default_horizon(std::size_t agents) {
  return std::max<std::size_t>(1000, 10 * agents * agents * agents);
}

template <OpinionScalar T>
std::vector<std::size_t> neighbor_set(const OpinionState<T>& state, const ConfidenceProfile<T>& profile,
                                      std::size_t agent) {
  const std::size_t n = state.size();
  if (agent >= n) {
    throw UsageError("agent index " + std::to_string(agent) + " out of range for " + std::to_string(n) + " agents");
  }
  if (profile.size() != n) throw UsageError("state and profile sizes differ");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j) {
    if (distance(state.values[j], state.values[agent]) <= profile[agent]) out.push_back(j);
  }
  return out;
}

template <OpinionScalar T>
OpinionState<T> step(const OpinionState<T>& state, const ConfidenceProfile<T>& profile, const StepOptions& options) {
  if (state.size() != profile.size()) throw UsageError("state and profile sizes differ");
  if constexpr (ScalarTraits<T>::exact) {
    return step_exact(state, profile, options);
  } else {
    return step_float(state, profile);
  }
}

template <OpinionScalar T>
Trajectory<T> simulate(const Instance& instance, const SimulateOptions& options) {
  return detail::run_trajectory<T>(instance, options, [](const OpinionState<T>& s, const ConfidenceProfile<T>& p,
                                                         const StepOptions& o) { return hk::step(s, p, o); });
}

template <OpinionScalar T>
Extremes<T> extreme_bounds(const OpinionState<T>& state) {
  if (state.values.empty()) throw UsageError("empty state has no extremes");
  const auto [lo, hi] = std::minmax_element(state.values.begin(), state.values.end());
  return {*lo, *hi};
}

std::vector<Rational> prefix_averages(std::span<const Rational> z, std::size_t offset) {
  if (z.empty()) throw UsageError("prefix_averages needs a nonempty sequence");
  if (offset >= z.size()) {
    throw UsageError("offset " + std::to_string(offset) + " out of range for length " + std::to_string(z.size()));
  }
  std::vector<Rational> out;
  out.reserve(z.size() - offset);
  Rational sum = 0;
  for (std::size_t k = 1; offset + k <= z.size(); ++k) {
    const Rational& term = z[offset + k - 1];
    if (term < 0) throw UsageError("prefix_averages needs nonnegative values");
    sum += term;
    out.emplace_back(sum / static_cast<unsigned long>(k));
  }
  return out;
}

template class ConfidenceProfile<Rational>;
template class ConfidenceProfile<double>;
template OpinionState<Rational> Instance::initial_as<Rational>() const;
template OpinionState<double> Instance::initial_as<double>() const;
template ConfidenceProfile<Rational> Instance::profile_as<Rational>() const;
template ConfidenceProfile<double> Instance::profile_as<double>() const;

#define HK_INSTANTIATE(T)                                                                                        \
  template std::vector<std::size_t> neighbor_set(const OpinionState<T>&, const ConfidenceProfile<T>&,            \
                                                 std::size_t);                                                    \
  template OpinionState<T> step(const OpinionState<T>&, const ConfidenceProfile<T>&, const StepOptions&);        \
  template Trajectory<T> simulate(const Instance&, const SimulateOptions&);                                      \
  template Extremes<T> extreme_bounds(const OpinionState<T>&);

HK_INSTANTIATE(Rational)
HK_INSTANTIATE(double)

#undef HK_INSTANTIATE

}  // namespace hk
