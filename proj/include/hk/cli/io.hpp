#pragma once

#include "hk/dynamics.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace hk::cli {

// Instance file: a JSON document
//
//   { "format": 1, "label": "...", "opinions": ["0.1", "1/3", ...],
//     "bounds": ["0.25", ...] }
//
// Values are decimal or "p/q" strings (integers may also be bare numbers).
// Decimals convert exactly.

Instance parse_instance(const nlohmann::json& document);
Instance read_instance_file(const std::filesystem::path& path);
/// Values are written as exact decimals where possible, "p/q" otherwise.
nlohmann::json instance_to_json(const Instance& instance);

enum class ValueFormat { decimal, exact };

struct CsvOptions {
  ValueFormat format = ValueFormat::decimal;
  int digits = 17;
};

/// Header `t,x_0,...,x_{n-1}`, one row per state.
template <OpinionScalar T>
void write_trajectory_csv(std::ostream& out, const Trajectory<T>& trajectory, const CsvOptions& options = {});

/// Reads rows written by write_trajectory_csv. Values are parsed exactly.
std::vector<OpinionState<Rational>> read_trajectory_csv(std::istream& in);

/// Wraps recorded states as a trajectory of `instance`. Exact runs whose
/// last two states agree are marked certified.
template <OpinionScalar T>
Trajectory<T> trajectory_from_states(const Instance& instance, const std::vector<OpinionState<Rational>>& states);

}  // namespace hk::cli
