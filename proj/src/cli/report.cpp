#include "hk/cli/report.hpp"

#include <chrono>
#include <ctime>

namespace hk::cli {

namespace {

template <OpinionScalar T>
nlohmann::json scalar(const T& value) {
  if constexpr (ScalarTraits<T>::exact) {
    return format_readable(value);
  } else {
    return value;
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

nlohmann::json witness_json(const Witness& w) {
  return {{"time", w.time}, {"agents", w.agents}, {"values", w.values}};
}

}  // namespace

nlohmann::json report_header(const std::string& command) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command}, {kTimestampField, utc_now()}};
}

template <OpinionScalar T>
nlohmann::json to_json(const ConvergenceReport<T>& report) {
  nlohmann::json out{{"classification", to_string(report.classification)},
                     {"engine", to_string(report.engine)},
                     {"fixation_time", nullptr},
                     {"partition", nullptr},
                     {"bands", nullptr}};
  if (report.fixation_time) out["fixation_time"] = *report.fixation_time;
  if (report.partition) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& cluster : report.partition->clusters) {
      clusters.push_back({{"value", scalar(cluster.value)}, {"members", cluster.members}});
    }
    out["partition"] = {{"gap", scalar(report.partition->gap)}, {"clusters", clusters}};
  }
  if (report.bands) {
    const auto& b = *report.bands;
    out["bands"] = {{"c", scalar(b.c)},         {"c_prime", scalar(b.c_prime)}, {"C", b.bottom},
                    {"C_prime", b.top},         {"t_star", b.t_star},           {"window", b.window}};
  }
  return out;
}

nlohmann::json to_json(const CheckResult& result) {
  nlohmann::json out{{"name", result.name}, {"verdict", to_string(result.verdict)}, {"detail", result.detail}};
  if (result.witness) out["witness"] = witness_json(*result.witness);
  return out;
}

nlohmann::json to_json(const EnsembleSpec& spec) {
  nlohmann::json checks = nlohmann::json::array();
  for (CheckId id : spec.checks) checks.push_back(to_string(id));
  nlohmann::json out{
      {"count", spec.count},
      {"n_range", {spec.n_lo, spec.n_hi}},
      {"bound_range", {format_readable(spec.r_lo), format_readable(spec.r_hi)}},
      {"homogeneous", spec.homogeneous},
      {"spread_cap", nullptr},
      {"grid", nullptr},
      {"seed", spec.seed},
      {"engine", to_string(spec.engine)},
      {"horizon", nullptr},
      {"denominator_cap_bits", spec.denominator_cap_bits},
      {"window", spec.analysis.window},
      {"float_tolerance", spec.analysis.float_tolerance},
      {"stall_window", spec.analysis.stall_window},
      {"checks", checks},
  };
  if (spec.spread_cap) {
    out["spread_cap"] = spec.spread_cap->kind == SpreadCap::Kind::twice_min_bound
                            ? nlohmann::json("auto2r")
                            : nlohmann::json(format_readable(spec.spread_cap->value));
  }
  if (spec.opinion_grid) out["grid"] = *spec.opinion_grid;
  if (spec.horizon) out["horizon"] = *spec.horizon;
  if (spec.instance_override) out["instance"] = spec.instance_override->label();
  return out;
}

nlohmann::json to_json(const EnsembleRecord& record) {
  nlohmann::json verdicts = nlohmann::json::object();
  nlohmann::json failures = nlohmann::json::array();
  for (const CheckVerdict& v : record.verdicts) {
    verdicts[std::string(to_string(v.id))] = to_string(v.verdict);
    if (v.verdict == Verdict::fail) {
      nlohmann::json failure{{"check", to_string(v.id)}, {"detail", v.detail}};
      if (v.witness) failure["witness"] = witness_json(*v.witness);
      failures.push_back(failure);
    }
  }
  nlohmann::json out{{"index", record.index},
                     {"label", record.label},
                     {"agents", record.agents},
                     {"precondition", record.precondition},
                     {"classification", to_string(record.classification)},
                     {"truncation", to_string(record.truncation)},
                     {"fixation_time", nullptr},
                     {"cluster_count", record.cluster_count},
                     {"steps", record.steps},
                     {"verdicts", verdicts}};
  if (record.fixation_time) out["fixation_time"] = *record.fixation_time;
  if (!failures.empty()) out["failures"] = failures;
  if (record.error) out["error"] = *record.error;
  return out;
}

nlohmann::json to_json(const EnsembleAggregates& aggregates) {
  auto histogram = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, count] : h) out[std::to_string(key)] = count;
    return out;
  };
  nlohmann::json failures = nlohmann::json::array();
  for (const EnsembleFailure& f : aggregates.failures) {
    nlohmann::json item{{"index", f.index}, {"label", f.label}, {"checks", f.checks}};
    if (f.error) item["error"] = *f.error;
    failures.push_back(item);
  }
  return {{"count", aggregates.count},
          {"certified", aggregates.certified},
          {"certified_fraction", aggregates.certified_fraction},
          {"classification_counts", aggregates.classification_counts},
          {"fixation_histogram", histogram(aggregates.fixation_histogram)},
          {"cluster_histogram", histogram(aggregates.cluster_histogram)},
          {"verdict_counts", aggregates.verdict_counts},
          {"failures", failures}};
}

nlohmann::json ensemble_report(const EnsembleSpec& spec, const EnsembleSummary& summary) {
  nlohmann::json report = report_header("ensemble");
  report["engine"] = to_string(spec.engine);
  report["seed"] = spec.seed;
  report["horizon"] = spec.horizon ? nlohmann::json(*spec.horizon) : nlohmann::json("default");
  report["spec"] = to_json(spec);
  report["summary"] = to_json(summary.aggregates);
  nlohmann::json records = nlohmann::json::array();
  for (const EnsembleRecord& record : summary.records) records.push_back(to_json(record));
  report["records"] = records;
  return report;
}

nlohmann::json without_timestamp(nlohmann::json report) {
  report.erase(kTimestampField);
  return report;
}

template nlohmann::json to_json(const ConvergenceReport<Rational>&);
template nlohmann::json to_json(const ConvergenceReport<double>&);

}  // namespace hk::cli
