#pragma once

#include "hk/analysis.hpp"
#include "hk/dynamics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hk {

/// Cap on the initial spread x_max(0) - x_min(0): a fixed value, or twice
/// the drawn instance's smallest bound.
struct SpreadCap {
  enum class Kind { fixed, twice_min_bound };
  Kind kind = Kind::fixed;
  Rational value;

  static SpreadCap fixed(Rational cap) { return {Kind::fixed, std::move(cap)}; }
  static SpreadCap twice_min_bound() { return {Kind::twice_min_bound, Rational(0)}; }
};

struct EnsembleSpec {
  std::size_t count = 1;
  std::size_t n_lo = 2;
  std::size_t n_hi = 10;
  Rational r_lo = Rational(1, 10);
  Rational r_hi = 1;
  /// One bound shared by all agents of an instance.
  bool homogeneous = false;
  std::optional<SpreadCap> spread_cap;
  /// Opinions drawn as k/g. Exact runs default to 1000; float runs without
  /// a grid draw from [0, 1].
  std::optional<std::uint32_t> opinion_grid;
  std::uint64_t seed = 0;
  Engine engine = Engine::exact;
  /// Defaults to default_horizon(n) per instance.
  std::optional<std::size_t> horizon;
  std::size_t denominator_cap_bits = kDefaultDenominatorCapBits;
  std::vector<CheckId> checks;
  AnalysisOptions analysis;
  /// Replaces generation; every index runs this instance.
  std::optional<Instance> instance_override;

  /// Throws UsageError on empty or inverted ranges, or bounds outside (0, 1].
  void validate() const;
};

inline constexpr std::uint32_t kDefaultOpinionGrid = 1000;

struct CheckVerdict {
  CheckId id;
  Verdict verdict;
  std::string detail;
  std::optional<Witness> witness;
};

struct EnsembleRecord {
  std::string label;
  std::size_t index = 0;  ///< regenerates the instance together with the seed
  std::size_t agents = 0;
  std::string precondition;
  Classification classification = Classification::undecided;
  Truncation truncation = Truncation::horizon_reached;
  std::optional<std::size_t> fixation_time;
  std::size_t cluster_count = 0;
  std::size_t steps = 0;
  std::vector<CheckVerdict> verdicts;
  /// Set when the instance could not be run at all.
  std::optional<std::string> error;

  bool failed() const;
};

struct EnsembleFailure {
  std::size_t index;
  std::string label;
  std::vector<std::string> checks;
  std::optional<std::string> error;

  friend bool operator==(const EnsembleFailure&, const EnsembleFailure&) = default;
};

struct EnsembleAggregates {
  std::size_t count = 0;
  std::size_t certified = 0;
  double certified_fraction = 0.0;
  std::map<std::string, std::size_t> classification_counts;
  std::map<std::size_t, std::size_t> fixation_histogram;
  std::map<std::size_t, std::size_t> cluster_histogram;
  std::map<std::string, std::map<std::string, std::size_t>> verdict_counts;
  std::vector<EnsembleFailure> failures;  ///< ordered by index

  friend bool operator==(const EnsembleAggregates&, const EnsembleAggregates&) = default;
};

struct EnsembleSummary {
  std::vector<EnsembleRecord> records;  ///< index order
  EnsembleAggregates aggregates;
};

/// Deterministic in (seed, index); independent of any other index.
Instance generate_instance(const EnsembleSpec& spec, std::size_t index);

/// Runs one instance end to end. Exceptions are captured in the record.
EnsembleRecord run_instance(const EnsembleSpec& spec, std::size_t index);

/// Instances run concurrently; the result does not depend on the thread
/// count or schedule.
EnsembleSummary run_ensemble(const EnsembleSpec& spec);

/// Independent of record order.
EnsembleAggregates summarize(const std::vector<EnsembleRecord>& records);

}  // namespace hk
