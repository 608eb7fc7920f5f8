#include "hk/ensemble.hpp"

#include <algorithm>
#include <random>

namespace hk {

namespace {

// Counter-mode stream: (seed, index) alone determines the generator state.
std::mt19937_64 instance_rng(std::uint64_t seed, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32), 0x484bU};
  return std::mt19937_64(seq);
}

Rational grid_point(std::mt19937_64& rng, std::uint32_t grid) {
  std::uniform_int_distribution<std::uint32_t> pick(0, grid);
  Rational value(pick(rng), grid);
  value.canonicalize();
  return value;
}

Rational draw_bound(std::mt19937_64& rng, const EnsembleSpec& spec) {
  if (spec.r_lo == spec.r_hi) return spec.r_lo;
  const bool continuous = spec.engine == Engine::floating && !spec.opinion_grid;
  if (continuous) {
    std::uniform_real_distribution<double> pick(to_double(spec.r_lo), to_double(spec.r_hi));
    Rational r = to_rational(pick(rng));
    return std::clamp(r, spec.r_lo, spec.r_hi);
  }
  const Rational fraction = grid_point(rng, spec.opinion_grid.value_or(kDefaultOpinionGrid));
  return Rational(spec.r_lo + (spec.r_hi - spec.r_lo) * fraction);
}

Rational draw_opinion(std::mt19937_64& rng, const EnsembleSpec& spec) {
  if (spec.engine == Engine::floating && !spec.opinion_grid) {
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    return to_rational(pick(rng));
  }
  return grid_point(rng, spec.opinion_grid.value_or(kDefaultOpinionGrid));
}

// Shrinks opinions about their midpoint so the spread is at most `cap`.
void rescale_spread(std::vector<Rational>& opinions, const Rational& cap) {
  const auto [lo_it, hi_it] = std::minmax_element(opinions.begin(), opinions.end());
  const Rational lo = *lo_it;
  const Rational hi = *hi_it;
  const Rational spread = hi - lo;
  if (spread <= cap) return;
  const Rational mid = (lo + hi) / 2;
  const Rational factor = cap / spread;
  for (Rational& x : opinions) x = mid + (x - mid) * factor;
}

template <OpinionScalar T>
void run_into(EnsembleRecord& record, const EnsembleSpec& spec, const Instance& instance) {
  SimulateOptions options;
  options.horizon = spec.horizon.value_or(default_horizon(instance.size()));
  options.stop_at_fixed_point = true;
  options.denominator_cap_bits = spec.denominator_cap_bits;
  const Trajectory<T> trajectory = simulate<T>(instance, options);
  const ConvergenceReport<T> report = classify(trajectory, spec.analysis);

  record.truncation = trajectory.truncation;
  record.steps = trajectory.size() - 1;
  record.classification = report.classification;
  record.fixation_time = report.fixation_time;
  record.cluster_count = report.partition ? report.partition->size() : 0;
  for (CheckId id : spec.checks) {
    CheckResult result = run_check(id, trajectory, spec.analysis);
    record.verdicts.push_back({id, result.verdict, std::move(result.detail), std::move(result.witness)});
  }
}

}  // namespace

void EnsembleSpec::validate() const {
  if (count < 1) throw UsageError("ensemble count must be at least 1");
  if (instance_override) return;
  if (n_lo < 1 || n_lo > n_hi) throw UsageError("n range must satisfy 1 <= n_lo <= n_hi");
  if (!(r_lo > 0) || r_lo > r_hi || r_hi > 1) {
    throw UsageError("bound range must satisfy 0 < r_lo <= r_hi <= 1 (confidence bounds lie in (0, 1])");
  }
  if (opinion_grid && *opinion_grid < 1) throw UsageError("opinion grid must be positive");
  if (spread_cap && spread_cap->kind == SpreadCap::Kind::fixed && spread_cap->value < 0) {
    throw UsageError("spread cap must be nonnegative");
  }
  if (horizon && *horizon < 1) throw UsageError("horizon must be at least 1");
}

bool EnsembleRecord::failed() const {
  return error.has_value() ||
         std::any_of(verdicts.begin(), verdicts.end(), [](const CheckVerdict& v) { return v.verdict == Verdict::fail; });
}

Instance generate_instance(const EnsembleSpec& spec, std::size_t index) {
  spec.validate();
  if (index >= spec.count) {
    throw UsageError("instance index " + std::to_string(index) + " out of range for count " + std::to_string(spec.count));
  }
  if (spec.instance_override) return *spec.instance_override;

  std::mt19937_64 rng = instance_rng(spec.seed, index);
  std::uniform_int_distribution<std::size_t> pick_n(spec.n_lo, spec.n_hi);
  const std::size_t n = pick_n(rng);

  std::vector<Rational> opinions;
  opinions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) opinions.push_back(draw_opinion(rng, spec));

  std::vector<Rational> bounds;
  bounds.reserve(n);
  if (spec.homogeneous) {
    bounds.assign(n, draw_bound(rng, spec));
  } else {
    for (std::size_t i = 0; i < n; ++i) bounds.push_back(draw_bound(rng, spec));
  }

  if (spec.spread_cap) {
    const Rational cap = spec.spread_cap->kind == SpreadCap::Kind::fixed
                             ? spec.spread_cap->value
                             : Rational(2 * *std::min_element(bounds.begin(), bounds.end()));
    rescale_spread(opinions, cap);
  }
  return Instance(std::move(opinions), std::move(bounds),
                  "seed" + std::to_string(spec.seed) + "-" + std::to_string(index));
}

EnsembleRecord run_instance(const EnsembleSpec& spec, std::size_t index) {
  EnsembleRecord record;
  record.index = index;
  record.label = "seed" + std::to_string(spec.seed) + "-" + std::to_string(index);
  try {
    const Instance instance = generate_instance(spec, index);
    record.label = instance.label().empty() ? record.label : instance.label();
    record.agents = instance.size();
    record.precondition = std::string(check_corollary_precondition(instance).tag());
    if (spec.engine == Engine::exact) {
      run_into<Rational>(record, spec, instance);
    } else {
      run_into<double>(record, spec, instance);
    }
  } catch (const std::exception& e) {
    record.error = e.what();
  }
  return record;
}

EnsembleSummary run_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  EnsembleSummary summary;
  summary.records.resize(spec.count);
  const auto count = static_cast<std::ptrdiff_t>(spec.count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    summary.records[static_cast<std::size_t>(i)] = run_instance(spec, static_cast<std::size_t>(i));
  }
  summary.aggregates = summarize(summary.records);
  return summary;
}

EnsembleAggregates summarize(const std::vector<EnsembleRecord>& records) {
  if (records.empty()) throw UsageError("cannot summarize an empty record list");
  std::vector<const EnsembleRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const EnsembleRecord* a, const EnsembleRecord* b) { return a->index < b->index; });

  EnsembleAggregates agg;
  agg.count = records.size();
  for (const EnsembleRecord* r : ordered) {
    ++agg.classification_counts[std::string(to_string(r->classification))];
    if (r->classification == Classification::finite_time_certified) {
      ++agg.certified;
      if (r->fixation_time) ++agg.fixation_histogram[*r->fixation_time];
    }
    if (!r->error) ++agg.cluster_histogram[r->cluster_count];
    for (const CheckVerdict& v : r->verdicts) {
      ++agg.verdict_counts[std::string(to_string(v.id))][std::string(to_string(v.verdict))];
    }
    if (r->failed()) {
      EnsembleFailure failure{r->index, r->label, {}, r->error};
      for (const CheckVerdict& v : r->verdicts) {
        if (v.verdict == Verdict::fail) failure.checks.emplace_back(to_string(v.id));
      }
      agg.failures.push_back(std::move(failure));
    }
  }
  agg.certified_fraction = static_cast<double>(agg.certified) / static_cast<double>(agg.count);
  return agg;
}

}  // namespace hk
