#include "hk/cli/commands.hpp"

#include "hk/cli/io.hpp"
#include "hk/cli/report.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hk::cli {

namespace {

struct BuiltinExample {
  const char* name;
  const char* opinions[3];
  const char* bounds[3];
};

constexpr BuiltinExample kExamples[] = {
    {"paper-asymptotic", {"0.1", "0.4", "0.8"}, {"0.1", "0.4", "0.1"}},
};

std::string example_names() {
  std::string names;
  for (const auto& e : kExamples) {
    if (!names.empty()) names += ", ";
    names += e.name;
  }
  return names;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw UsageError("cannot write " + path.string());
  return file;
}

std::pair<std::string, std::string> split_pair(const std::string& text, const char* flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
    throw UsageError(std::string(flag) + " expects two comma-separated values, got '" + text + "'");
  }
  return {text.substr(0, comma), text.substr(comma + 1)};
}

std::size_t parse_count(const std::string& text, const char* what) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(std::string(what) + " must be a nonnegative integer");
  return static_cast<std::size_t>(value);
}

SpreadCap parse_spread_cap(const std::string& text) {
  if (text == "auto2r") return SpreadCap::twice_min_bound();
  return SpreadCap::fixed(parse_rational(text));
}

template <OpinionScalar T>
void print_summary(std::ostream& os, const Trajectory<T>& trajectory, const ConvergenceReport<T>& report) {
  os << "instance: " << (trajectory.instance.label().empty() ? "(unlabeled)" : trajectory.instance.label())
     << " (n=" << trajectory.instance.size() << ")\n";
  os << "engine: " << to_string(trajectory.engine) << ", steps: " << trajectory.size() - 1
     << ", truncation: " << to_string(trajectory.truncation) << "\n";
  os << "classification: " << to_string(report.classification);
  if (report.fixation_time) os << " (fixed from t=" << *report.fixation_time << ")";
  os << "\n";
  if (report.partition) os << "clusters: " << report.partition->size() << "\n";
}

template <OpinionScalar T>
int simulate_with(const SimulateArgs& args, const Instance& instance, std::ostream& out, std::ostream& err) {
  SimulateOptions options;
  options.horizon = resolve_horizon(args.horizon, instance.size());
  options.stop_at_fixed_point = args.stop_at_fixed_point;
  options.denominator_cap_bits = args.denominator_cap_bits;
  if (args.stop_at_fixed_point && !ScalarTraits<T>::exact) {
    err << "warning: the float engine never certifies fixed points; running to the horizon\n";
  }
  const Trajectory<T> trajectory = simulate<T>(instance, options);
  const CsvOptions csv{args.rational_output ? ValueFormat::exact : ValueFormat::decimal, args.digits};

  std::ostream* summary = &out;
  if (args.out) {
    std::ofstream file = open_output(*args.out);
    write_trajectory_csv(file, trajectory, csv);
  } else {
    write_trajectory_csv(out, trajectory, csv);
    summary = &err;
  }
  print_summary(*summary, trajectory, classify(trajectory));

  if (trajectory.truncation == Truncation::denominator_cap_exceeded) {
    err << "warning: agent " << trajectory.capped_agent.value_or(0) << " exceeded the " << args.denominator_cap_bits
        << "-bit denominator cap after step " << trajectory.size() - 1 << "; output is partial\n";
    return kExitCapacity;
  }
  return kExitOk;
}

template <OpinionScalar T>
int verify_with(const VerifyArgs& args, const Instance& instance, std::ostream& out, std::ostream& err) {
  const std::vector<CheckId> checks = parse_check_list(args.checks);
  const std::size_t horizon = resolve_horizon(args.horizon, instance.size());
  std::optional<Trajectory<T>> trajectory;
  if (args.replay) {
    std::ifstream in(*args.replay);
    if (!in) throw UsageError("cannot open trajectory " + args.replay->string());
    trajectory.emplace(trajectory_from_states<T>(instance, read_trajectory_csv(in)));
  } else {
    trajectory.emplace(simulate<T>(instance, {horizon, true, args.denominator_cap_bits}));
  }
  if (trajectory->truncation == Truncation::denominator_cap_exceeded) {
    err << "warning: denominator cap reached after step " << trajectory->size() - 1
        << "; checks cover the partial trajectory\n";
  }

  const ConvergenceReport<T> report = classify(*trajectory, args.analysis);
  const std::vector<CheckResult> results = run_checks(*trajectory, checks, args.analysis);

  nlohmann::json doc = report_header("verify");
  doc["engine"] = to_string(ScalarTraits<T>::engine);
  doc["horizon"] = horizon;
  doc["window"] = args.analysis.window;
  doc["seed"] = nullptr;
  doc["instance"] = instance_to_json(instance);
  doc["source"] = args.replay ? "replay" : "simulation";
  doc["steps"] = trajectory->size() - 1;
  doc["truncation"] = to_string(trajectory->truncation);
  doc["report"] = to_json(report);
  doc["checks"] = nlohmann::json::array();
  bool failed = false;
  for (const CheckResult& r : results) {
    doc["checks"].push_back(to_json(r));
    failed = failed || r.verdict == Verdict::fail;
  }
  doc["passed"] = !failed;

  if (args.out) {
    std::ofstream file = open_output(*args.out);
    file << doc.dump(2) << "\n";
    for (const CheckResult& r : results) {
      out << r.name << ": " << to_string(r.verdict) << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
    }
  } else {
    out << doc.dump(2) << "\n";
  }
  return failed ? kExitCheckFailed : kExitOk;
}

}  // namespace

std::size_t resolve_horizon(std::optional<std::size_t> requested, std::size_t agents) {
  if (requested) {
    if (*requested < 1) throw UsageError("horizon must be at least 1");
    return *requested;
  }
  if (const char* env = std::getenv(kHorizonEnvVar); env != nullptr && *env != '\0') {
    const std::size_t value = parse_count(env, kHorizonEnvVar);
    if (value < 1) throw UsageError(std::string(kHorizonEnvVar) + " must be at least 1");
    return value;
  }
  return default_horizon(agents);
}

std::vector<CheckId> parse_check_list(const std::string& text) {
  if (text == "all") return {all_checks().begin(), all_checks().end()};
  std::vector<CheckId> out;
  std::stringstream stream(text);
  std::string name;
  while (std::getline(stream, name, ',')) {
    if (name.empty()) continue;
    const CheckId id = parse_check(name);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

EnsembleSpec resolve_ensemble_spec(const EnsembleArgs& args) {
  EnsembleSpec spec;
  spec.n_lo = 2;
  spec.n_hi = 15;
  spec.checks.assign(all_checks().begin(), all_checks().end());

  if (args.spec) {
    std::ifstream in(*args.spec);
    if (!in) throw UsageError("cannot open ensemble spec " + args.spec->string());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError("malformed ensemble spec: " + std::string(e.what()));
    }
    try {
      if (doc.contains("count")) spec.count = doc.at("count").get<std::size_t>();
      if (doc.contains("n_range")) {
        spec.n_lo = doc.at("n_range").at(0).get<std::size_t>();
        spec.n_hi = doc.at("n_range").at(1).get<std::size_t>();
      }
      if (doc.contains("bound_range")) {
        spec.r_lo = parse_rational(doc.at("bound_range").at(0).get<std::string>());
        spec.r_hi = parse_rational(doc.at("bound_range").at(1).get<std::string>());
      }
      if (doc.contains("spread_cap")) spec.spread_cap = parse_spread_cap(doc.at("spread_cap").get<std::string>());
      if (doc.contains("grid")) spec.opinion_grid = doc.at("grid").get<std::uint32_t>();
      if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
      if (doc.contains("engine")) spec.engine = parse_engine(doc.at("engine").get<std::string>());
      if (doc.contains("horizon")) spec.horizon = doc.at("horizon").get<std::size_t>();
      if (doc.contains("checks")) {
        const auto& checks = doc.at("checks");
        std::string joined;
        if (checks.is_string()) {
          joined = checks.get<std::string>();
        } else {
          for (const auto& c : checks) joined += c.get<std::string>() + ",";
        }
        spec.checks = parse_check_list(joined);
      }
      if (doc.contains("window")) spec.analysis.window = doc.at("window").get<std::size_t>();
      if (doc.contains("homogeneous")) spec.homogeneous = doc.at("homogeneous").get<bool>();
      if (doc.contains("denominator_cap_bits")) spec.denominator_cap_bits = doc.at("denominator_cap_bits").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("bad ensemble spec field: " + std::string(e.what()));
    }
  }

  if (args.count) spec.count = *args.count;
  if (args.n_range) {
    const auto [lo, hi] = split_pair(*args.n_range, "--n-range");
    spec.n_lo = parse_count(lo, "--n-range");
    spec.n_hi = parse_count(hi, "--n-range");
  }
  if (args.bound_range) {
    const auto [lo, hi] = split_pair(*args.bound_range, "--bound-range");
    spec.r_lo = parse_rational(lo);
    spec.r_hi = parse_rational(hi);
  }
  if (args.spread_cap) spec.spread_cap = parse_spread_cap(*args.spread_cap);
  if (args.grid) spec.opinion_grid = *args.grid;
  if (args.seed) spec.seed = *args.seed;
  if (args.engine) spec.engine = parse_engine(*args.engine);
  if (args.horizon) spec.horizon = *args.horizon;
  if (args.checks) spec.checks = parse_check_list(*args.checks);
  if (args.window) spec.analysis.window = *args.window;
  if (args.homogeneous) spec.homogeneous = true;
  if (args.denominator_cap_bits) spec.denominator_cap_bits = *args.denominator_cap_bits;
  if (args.instance) spec.instance_override = read_instance_file(*args.instance);
  if (!spec.horizon && std::getenv(kHorizonEnvVar) != nullptr) spec.horizon = resolve_horizon(std::nullopt, 0);
  spec.validate();
  return spec;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  const Instance instance = read_instance_file(args.instance);
  if (args.engine == Engine::exact) return simulate_with<Rational>(args, instance, out, err);
  return simulate_with<double>(args, instance, out, err);
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  const Instance instance = read_instance_file(args.instance);
  if (args.engine == Engine::exact) return verify_with<Rational>(args, instance, out, err);
  return verify_with<double>(args, instance, out, err);
}

int cmd_ensemble(const EnsembleArgs& args, std::ostream& out, std::ostream& err) {
  const EnsembleSpec spec = resolve_ensemble_spec(args);
  if (args.threads) {
    if (*args.threads < 1) throw UsageError("--threads must be positive");
    omp_set_num_threads(*args.threads);
  }
  const EnsembleSummary summary = run_ensemble(spec);
  const nlohmann::json report = ensemble_report(spec, summary);
  if (args.out) {
    std::ofstream file = open_output(*args.out);
    file << report.dump(2) << "\n";
  } else {
    out << report.dump(2) << "\n";
  }
  const auto& agg = summary.aggregates;
  std::ostream& note = args.out ? out : err;
  note << "instances: " << agg.count << ", certified: " << agg.certified << " (fraction "
       << agg.certified_fraction << "), failures: " << agg.failures.size() << "\n";
  return agg.failures.empty() ? kExitOk : kExitCheckFailed;
}

int cmd_example(const ExampleArgs& args, std::ostream& out, std::ostream& /*err*/) {
  const BuiltinExample* example = nullptr;
  for (const auto& e : kExamples) {
    if (args.name == e.name) example = &e;
  }
  if (example == nullptr) {
    throw UsageError("unknown example '" + args.name + "'; available: " + example_names());
  }
  std::vector<Rational> opinions;
  std::vector<Rational> bounds;
  for (int i = 0; i < 3; ++i) {
    opinions.push_back(parse_rational(example->opinions[i]));
    bounds.push_back(parse_rational(example->bounds[i]));
  }
  const Instance instance(opinions, bounds, example->name);
  const Rational limit(9, 20);

  out << example->name << ": x(0) = (0.1, 0.4, 0.8), r = (0.1, 0.4, 0.1)\n"
      << "Agents 0 and 2 only ever see themselves; agent 1 sees everyone, so\n"
      << "x_1(t+1) = 3/10 + x_1(t)/3 and x_1(t) = 9/20 - (1/20)(1/3)^t never settles.\n\n";

  const bool show_exact = !args.engine || *args.engine == Engine::exact;
  const bool show_float = !args.engine || *args.engine == Engine::floating;
  if (show_exact) {
    const std::size_t steps = args.engine ? args.horizon.value_or(19) : 19;
    const Trajectory<Rational> exact = simulate<Rational>(instance, {steps, true, kDefaultDenominatorCapBits});
    out << "exact states:\n" << std::left << std::setw(5) << "t" << std::setw(8) << "x_0" << std::setw(24)
        << "x_1" << std::setw(8) << "x_2" << "x_1 (decimal)\n";
    for (const auto& state : exact.states) {
      out << std::setw(5) << state.time << std::setw(8) << format_exact(state.values[0]) << std::setw(24)
          << format_exact(state.values[1]) << std::setw(8) << format_exact(state.values[2])
          << format_decimal(state.values[1]) << "\n";
    }
    const auto report = classify(exact);
    out << "classification: " << to_string(report.classification) << "\n\n";
  }
  if (show_float) {
    const std::size_t horizon = args.horizon.value_or(60);
    const Trajectory<double> run = simulate<double>(instance, {horizon, false, kDefaultDenominatorCapBits});
    const double x1 = run.back().values[1];
    std::ostringstream gap;
    gap << std::setprecision(3) << std::scientific << std::abs(x1 - 0.45);
    out << "float estimate after " << horizon << " steps: x_1 = " << format_decimal(x1)
        << ", |x_1 - 0.45| = " << gap.str() << "\n"
        << "x_0 = " << format_decimal(run.back().values[0]) << ", x_2 = " << format_decimal(run.back().values[2])
        << ", limit of x_1 = " << format_readable(limit) << "\n";
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous bounded-confidence opinion dynamics: simulate, verify, run ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  const std::vector<std::string> engines{"exact", "float"};
  std::string engine_name = "exact";

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one instance and write its trajectory as CSV");
  simulate_cmd->add_option("instance", sim.instance, "Instance file")->required();
  simulate_cmd->add_option("--engine", engine_name, "exact or float")->check(CLI::IsMember(engines));
  simulate_cmd->add_option("--horizon", sim.horizon, "Maximum number of steps");
  simulate_cmd->add_flag("--stop-at-fixed-point", sim.stop_at_fixed_point, "Stop once an exact fixed point is reached");
  simulate_cmd->add_option("--out", sim.out, "CSV output path (default: standard output)");
  simulate_cmd->add_flag("--rational-output", sim.rational_output, "Write exact p/q values");
  simulate_cmd->add_option("--digits", sim.digits, "Significant digits for decimal output")->check(CLI::Range(1, 200));
  simulate_cmd->add_option("--cap-bits", sim.denominator_cap_bits, "Denominator cap in bits (exact engine)");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run convergence checks on one instance and emit a JSON report");
  verify_cmd->add_option("instance", ver.instance, "Instance file")->required();
  verify_cmd->add_option("--checks", ver.checks, "Comma-separated check names or 'all'");
  verify_cmd->add_option("--engine", engine_name, "exact or float")->check(CLI::IsMember(engines));
  verify_cmd->add_option("--horizon", ver.horizon, "Maximum number of steps");
  verify_cmd->add_option("--window", ver.analysis.window, "Frozen-band window")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--tolerance", ver.analysis.float_tolerance, "Float convergence tolerance");
  verify_cmd->add_option("--stall-window", ver.analysis.stall_window, "Float convergence window")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--replay", ver.replay, "Check this trajectory CSV instead of simulating");
  verify_cmd->add_option("--out", ver.out, "JSON report path (default: standard output)");
  verify_cmd->add_option("--cap-bits", ver.denominator_cap_bits, "Denominator cap in bits (exact engine)");

  EnsembleArgs ens;
  auto* ensemble_cmd = app.add_subcommand("ensemble", "Generate and check a seeded batch of instances");
  ensemble_cmd->add_option("--spec", ens.spec, "Ensemble spec file (JSON); flags override it");
  ensemble_cmd->add_option("--instance", ens.instance, "Run this instance for every index");
  ensemble_cmd->add_option("--count", ens.count, "Number of instances");
  ensemble_cmd->add_option("--n-range", ens.n_range, "Agent count range lo,hi");
  ensemble_cmd->add_option("--bound-range", ens.bound_range, "Confidence bound range lo,hi");
  ensemble_cmd->add_option("--spread-cap", ens.spread_cap, "Initial spread cap: a value or auto2r (2 r_min)");
  ensemble_cmd->add_option("--grid", ens.grid, "Opinion grid g (opinions k/g)");
  ensemble_cmd->add_option("--seed", ens.seed, "Random seed");
  ensemble_cmd->add_option("--engine", ens.engine, "exact or float")->check(CLI::IsMember(engines));
  ensemble_cmd->add_option("--horizon", ens.horizon, "Maximum number of steps per instance");
  ensemble_cmd->add_option("--checks", ens.checks, "Comma-separated check names or 'all'");
  ensemble_cmd->add_option("--window", ens.window, "Frozen-band window");
  ensemble_cmd->add_flag("--homogeneous", ens.homogeneous, "One confidence bound per instance");
  ensemble_cmd->add_option("--cap-bits", ens.denominator_cap_bits, "Denominator cap in bits (exact engine)");
  ensemble_cmd->add_option("--threads", ens.threads, "Worker threads");
  ensemble_cmd->add_option("--out", ens.out, "JSON report path (default: standard output)");

  ExampleArgs ex;
  std::optional<std::string> example_engine;
  auto* example_cmd = app.add_subcommand("example", "Run a built-in instance (" + example_names() + ")");
  example_cmd->add_option("name", ex.name, "Example name")->required();
  example_cmd->add_option("--engine", example_engine, "exact or float")->check(CLI::IsMember(engines));
  example_cmd->add_option("--horizon", ex.horizon, "Steps to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) {
      sim.engine = parse_engine(engine_name);
      return cmd_simulate(sim, out, err);
    }
    if (verify_cmd->parsed()) {
      ver.engine = parse_engine(engine_name);
      return cmd_verify(ver, out, err);
    }
    if (ensemble_cmd->parsed()) return cmd_ensemble(ens, out, err);
    if (example_cmd->parsed()) {
      if (example_engine) ex.engine = parse_engine(*example_engine);
      return cmd_example(ex, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hk::cli
