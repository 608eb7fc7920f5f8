#pragma once

#include "hk/analysis.hpp"
#include "hk/ensemble.hpp"

#include <json.hpp>

#include <string>

namespace hk::cli {

inline constexpr const char* kToolName = "hk";
inline constexpr const char* kToolVersion = "1.0.0";

/// The only field that varies between otherwise identical runs.
inline constexpr const char* kTimestampField = "generated_at";

/// Tool name, version, command and timestamp.
nlohmann::json report_header(const std::string& command);

template <OpinionScalar T>
nlohmann::json to_json(const ConvergenceReport<T>& report);

nlohmann::json to_json(const CheckResult& result);
nlohmann::json to_json(const EnsembleSpec& spec);
nlohmann::json to_json(const EnsembleRecord& record);
nlohmann::json to_json(const EnsembleAggregates& aggregates);

/// Header plus spec, aggregates and per-instance records.
nlohmann::json ensemble_report(const EnsembleSpec& spec, const EnsembleSummary& summary);

/// Copy of a report without the timestamp, for determinism comparisons.
nlohmann::json without_timestamp(nlohmann::json report);

}  // namespace hk::cli
