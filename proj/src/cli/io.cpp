#include "hk/cli/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace hk::cli {

namespace {

std::vector<Rational> parse_values(const nlohmann::json& document, const char* field) {
  if (!document.contains(field)) throw UsageError(std::string("instance is missing field '") + field + "'");
  const nlohmann::json& list = document.at(field);
  if (!list.is_array() || list.empty()) {
    throw UsageError(std::string("field '") + field + "' must be a nonempty list");
  }
  std::vector<Rational> out;
  out.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const nlohmann::json& item = list[i];
    const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
    try {
      if (item.is_string()) {
        out.push_back(parse_rational(item.get<std::string>()));
      } else if (item.is_number_integer()) {
        out.emplace_back(std::to_string(item.get<long long>()));
      } else {
        throw UsageError("expected a decimal or p/q string");
      }
    } catch (const UsageError& e) {
      throw UsageError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Instance parse_instance(const nlohmann::json& document) {
  if (!document.is_object()) throw UsageError("instance document must be an object");
  if (document.contains("format")) {
    const auto& format = document.at("format");
    if (!format.is_number_integer() || format.get<int>() != 1) throw UsageError("field 'format' must be 1");
  }
  std::string label;
  if (document.contains("label")) {
    if (!document.at("label").is_string()) throw UsageError("field 'label' must be a string");
    label = document.at("label").get<std::string>();
  }
  return Instance(parse_values(document, "opinions"), parse_values(document, "bounds"), std::move(label));
}

Instance read_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open instance file " + path.string());
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("malformed instance file " + path.string() + ": " + e.what());
  }
  return parse_instance(document);
}

nlohmann::json instance_to_json(const Instance& instance) {
  nlohmann::json opinions = nlohmann::json::array();
  for (const Rational& v : instance.initial().values) opinions.push_back(format_readable(v));
  nlohmann::json bounds = nlohmann::json::array();
  for (const Rational& r : instance.profile().bounds()) bounds.push_back(format_readable(r));
  nlohmann::json document{{"format", 1}, {"opinions", opinions}, {"bounds", bounds}};
  if (!instance.label().empty()) document["label"] = instance.label();
  return document;
}

template <OpinionScalar T>
void write_trajectory_csv(std::ostream& out, const Trajectory<T>& trajectory, const CsvOptions& options) {
  const std::size_t n = trajectory.instance.size();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << "\n";
  for (const OpinionState<T>& state : trajectory.states) {
    out << state.time;
    for (const T& v : state.values) {
      out << ',' << (options.format == ValueFormat::exact ? format_exact(v) : format_decimal(v, options.digits));
    }
    out << "\n";
  }
}

std::vector<OpinionState<Rational>> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw UsageError("trajectory CSV is empty");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.front() != "t") throw UsageError("trajectory CSV header must be t,x_0,...");
  const std::size_t n = header.size() - 1;

  std::vector<OpinionState<Rational>> states;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != n + 1) {
      throw UsageError("trajectory CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                       " columns, expected " + std::to_string(n + 1));
    }
    OpinionState<Rational> state;
    try {
      state.time = std::stoull(cells[0]);
    } catch (const std::exception&) {
      throw UsageError("trajectory CSV row " + std::to_string(row) + " has a bad step index");
    }
    state.values.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) state.values.push_back(parse_rational(cells[i]));
    states.push_back(std::move(state));
  }
  if (states.empty()) throw UsageError("trajectory CSV has no rows");
  return states;
}

template <OpinionScalar T>
Trajectory<T> trajectory_from_states(const Instance& instance, const std::vector<OpinionState<Rational>>& states) {
  Trajectory<T> trajectory{instance, instance.profile_as<T>(), {}, Truncation::horizon_reached, std::nullopt};
  for (const auto& state : states) {
    if (state.size() != instance.size()) throw UsageError("recorded states do not match the instance size");
    OpinionState<T> converted{{}, state.time};
    for (const Rational& v : state.values) converted.values.push_back(from_rational<T>(v));
    trajectory.states.push_back(std::move(converted));
  }
  const auto& s = trajectory.states;
  if (ScalarTraits<T>::exact && s.size() >= 2 && s[s.size() - 1].values == s[s.size() - 2].values) {
    trajectory.truncation = Truncation::fixed_point_certified;
  }
  return trajectory;
}

template void write_trajectory_csv(std::ostream&, const Trajectory<Rational>&, const CsvOptions&);
template void write_trajectory_csv(std::ostream&, const Trajectory<double>&, const CsvOptions&);
template Trajectory<Rational> trajectory_from_states(const Instance&, const std::vector<OpinionState<Rational>>&);
template Trajectory<double> trajectory_from_states(const Instance&, const std::vector<OpinionState<Rational>>&);

}  // namespace hk::cli
