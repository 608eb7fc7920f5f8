#include "hk/cli/commands.hpp"
#include "hk/cli/io.hpp"
#include "hk/cli/report.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hk;
using namespace hk::cli;
namespace fs = std::filesystem;

namespace {

struct Output {
  int code;
  std::string out;
  std::string err;
};

Output invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hk_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path path = scratch(name);
  std::ofstream(path) << text;
  return path;
}

const char* kAsymptotic = R"({"format": 1, "label": "asym", "opinions": ["0.1", "0.4", "0.8"], "bounds": ["0.1", "0.4", "0.1"]})";

}  // namespace

TEST_CASE("instance files round-trip") {
  const Instance inst = parse_instance(nlohmann::json::parse(
      R"({"format": 1, "label": "x", "opinions": ["1/3", "0.25", 1], "bounds": ["0.5", "2/3", "1"]})"));
  CHECK(inst.initial().values == std::vector<Rational>{Rational(1, 3), Rational(1, 4), Rational(1)});
  CHECK(inst.label() == "x");
  const Instance again = parse_instance(instance_to_json(inst));
  CHECK(again == inst);
  CHECK(parse_instance(nlohmann::json::parse(instance_to_json(again).dump())) == inst);
}

TEST_CASE("instance parse errors name the field") {
  auto message = [](const char* text) -> std::string {
    try {
      parse_instance(nlohmann::json::parse(text));
    } catch (const UsageError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message(R"({"opinions": ["0.1", "x"], "bounds": ["0.1", "0.2"]})").find("opinions[1]") != std::string::npos);
  CHECK(message(R"({"bounds": ["0.1"]})").find("opinions") != std::string::npos);
  CHECK(message(R"({"opinions": ["0.1"], "bounds": [0.5]})").find("bounds[0]") != std::string::npos);
  CHECK(message(R"({"opinions": ["0.1"], "bounds": ["0"]})").find("(0, 1]") != std::string::npos);
  CHECK(message(R"({"format": 2, "opinions": ["0.1"], "bounds": ["0.1"]})").find("format") != std::string::npos);
}

TEST_CASE("trajectory CSV round-trips under exact output") {
  const auto traj = simulate<Rational>(test::asymptotic_instance(), {25, true, kDefaultDenominatorCapBits});
  std::stringstream csv;
  write_trajectory_csv(csv, traj, {ValueFormat::exact, 17});
  const auto states = read_trajectory_csv(csv);
  CHECK(states == traj.states);
  const auto rebuilt = trajectory_from_states<Rational>(traj.instance, states);
  CHECK(rebuilt.states == traj.states);
  CHECK(rebuilt.truncation == Truncation::horizon_reached);
}

TEST_CASE("trajectory CSV rejects malformed rows") {
  std::stringstream bad("t,x_0,x_1\n0,0.1\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), UsageError);
  std::stringstream header("step,x_0\n0,0.1\n");
  CHECK_THROWS_AS(read_trajectory_csv(header), UsageError);
}

TEST_CASE("simulate command writes the closed-form trajectory") {
  const fs::path inst = write_file("asym.json", kAsymptotic);
  const fs::path csv = scratch("asym.csv");
  const auto result = invoke({"simulate", inst.string(), "--horizon", "20", "--rational-output", "--out", csv.string()});
  CHECK(result.code == kExitOk);
  CHECK(result.out.find("classification: undecided") != std::string::npos);
  std::ifstream in(csv);
  const auto states = read_trajectory_csv(in);
  REQUIRE(states.size() == 21);
  for (std::size_t t = 0; t < states.size(); ++t) {
    CHECK(states[t].values[0] == Rational(1, 10));
    CHECK(states[t].values[1] == test::asymptotic_closed_form(t));
  }

  const auto decimal = invoke({"simulate", inst.string(), "--horizon", "2"});
  CHECK(decimal.code == kExitOk);
  CHECK(decimal.out == "t,x_0,x_1,x_2\n0,0.1,0.4,0.8\n1,0.1,0.43333333333333333,0.8\n2,0.1,0.44444444444444444,0.8\n");
  CHECK(decimal.err.find("classification") != std::string::npos);
}

TEST_CASE("simulate command: single agent and invalid bounds") {
  const fs::path one = write_file("one.json", R"({"opinions": ["0.6"], "bounds": ["0.2"]})");
  const auto single = invoke({"simulate", one.string(), "--stop-at-fixed-point"});
  CHECK(single.code == kExitOk);
  CHECK(single.out == "t,x_0\n0,0.6\n1,0.6\n");

  const fs::path zero = write_file("zero.json", R"({"opinions": ["0.6", "0.1"], "bounds": ["0.2", "0"]})");
  const auto rejected = invoke({"simulate", zero.string()});
  CHECK(rejected.code == kExitUsage);
  CHECK(rejected.err.find("(0, 1]") != std::string::npos);

  CHECK(invoke({"simulate", scratch("missing.json").string()}).code == kExitUsage);
  CHECK(invoke({"simulate", one.string(), "--engine", "quad"}).code == kExitUsage);
}

TEST_CASE("simulate command reports capacity truncation") {
  const fs::path inst = write_file("asym_cap.json", kAsymptotic);
  const auto result = invoke({"simulate", inst.string(), "--horizon", "200", "--cap-bits", "32"});
  CHECK(result.code == kExitCapacity);
  CHECK(result.err.find("denominator cap") != std::string::npos);
}

TEST_CASE("verify command") {
  const fs::path inst = write_file("asym_v.json", kAsymptotic);
  const auto result = invoke({"verify", inst.string(), "--horizon", "100"});
  CHECK(result.code == kExitOk);
  const auto doc = nlohmann::json::parse(result.out);
  CHECK(doc["tool"] == kToolName);
  CHECK(doc["engine"] == "exact");
  CHECK(doc["horizon"] == 100);
  std::map<std::string, std::string> verdicts;
  for (const auto& c : doc["checks"]) verdicts[c["name"]] = c["verdict"];
  CHECK(verdicts["monotone-extremes"] == "pass");
  CHECK(verdicts["theorem1-window"] == "pass");
  CHECK(verdicts["order-preservation"] == "not-applicable");
  CHECK(doc["report"]["classification"] == "undecided");

  const fs::path homog = write_file("homog.json", R"({"opinions": ["0.1", "0.2", "0.9"], "bounds": ["0.3", "0.3", "0.3"]})");
  const auto h = nlohmann::json::parse(invoke({"verify", homog.string(), "--checks", "order-preservation,cluster-separation"}).out);
  REQUIRE(h["checks"].size() == 2);
  CHECK(h["checks"][0]["verdict"] == "pass");
  CHECK(h["checks"][1]["verdict"] == "pass");

  const auto unknown = invoke({"verify", inst.string(), "--checks", "no-such-check"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("theorem1-window") != std::string::npos);
}

TEST_CASE("verify replay of a corrupted trajectory fails with a witness") {
  const fs::path inst = write_file("asym_r.json", kAsymptotic);
  const fs::path csv = scratch("asym_r.csv");
  REQUIRE(invoke({"simulate", inst.string(), "--horizon", "60", "--rational-output", "--out", csv.string()}).code == 0);
  std::ifstream in(csv);
  auto states = read_trajectory_csv(in);
  in.close();
  states[3].values[0] = Rational(1, 20);
  {
    std::ofstream outfile(csv);
    Trajectory<Rational> t{test::asymptotic_instance(), test::asymptotic_instance().profile(), states,
                           Truncation::horizon_reached, std::nullopt};
    write_trajectory_csv(outfile, t, {ValueFormat::exact, 17});
  }
  const auto result = invoke({"verify", inst.string(), "--replay", csv.string(), "--checks", "monotone-extremes"});
  CHECK(result.code == kExitCheckFailed);
  const auto doc = nlohmann::json::parse(result.out);
  CHECK(doc["checks"][0]["verdict"] == "fail");
  CHECK(doc["checks"][0]["witness"]["time"] == 3);
  CHECK(doc["passed"] == false);
}

TEST_CASE("ensemble command is deterministic modulo the timestamp") {
  const std::vector<std::string> args{"ensemble", "--count", "40", "--bound-range", "0.5,1", "--seed", "42",
                                      "--engine", "exact"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  CHECK(a.code == kExitOk);
  CHECK(b.code == kExitOk);
  const auto ja = nlohmann::json::parse(a.out);
  CHECK(ja["summary"]["certified_fraction"] == 1.0);
  CHECK(without_timestamp(ja).dump() == without_timestamp(nlohmann::json::parse(b.out)).dump());
  CHECK(ja.contains(kTimestampField));
}

TEST_CASE("ensemble command: spec file, overrides and usage errors") {
  const fs::path spec = write_file("spec.json", R"({"count": 5, "n_range": [3, 4], "bound_range": ["0.1", "0.5"],
                                                     "spread_cap": "auto2r", "seed": 7, "checks": ["monotone-extremes"]})");
  const auto result = invoke({"ensemble", "--spec", spec.string(), "--count", "8", "--threads", "2"});
  CHECK(result.code == kExitOk);
  const auto doc = nlohmann::json::parse(result.out);
  CHECK(doc["spec"]["count"] == 8);
  CHECK(doc["spec"]["seed"] == 7);
  CHECK(doc["spec"]["spread_cap"] == "auto2r");
  CHECK(doc["records"].size() == 8);
  for (const auto& r : doc["records"]) {
    CHECK(r["agents"] >= 3);
    CHECK(r["agents"] <= 4);
    CHECK(r["classification"] == "finite-time-certified");
  }
  CHECK(invoke({"ensemble", "--bound-range", "0.6,0.5"}).code == kExitUsage);
  CHECK(invoke({"ensemble", "--bound-range", "0,0.5"}).code == kExitUsage);
  CHECK(invoke({"ensemble", "--n-range", "3"}).code == kExitUsage);
  CHECK(invoke({"ensemble", "--count", "0"}).code == kExitUsage);
}

TEST_CASE("horizon environment override") {
  CHECK(resolve_horizon(std::size_t{7}, 3) == 7);
  CHECK(resolve_horizon(std::nullopt, 20) == 80000);
  setenv(kHorizonEnvVar, "33", 1);
  CHECK(resolve_horizon(std::nullopt, 20) == 33);
  CHECK(resolve_horizon(std::size_t{7}, 3) == 7);
  setenv(kHorizonEnvVar, "abc", 1);
  CHECK_THROWS_AS(resolve_horizon(std::nullopt, 3), UsageError);
  unsetenv(kHorizonEnvVar);
}

TEST_CASE("example command") {
  const auto result = invoke({"example", "paper-asymptotic"});
  CHECK(result.code == kExitOk);
  CHECK(result.out.find("5230176601/11622614670") != std::string::npos);
  CHECK(result.out.find("|x_1 - 0.45|") != std::string::npos);

  const auto flt = invoke({"example", "paper-asymptotic", "--engine", "float", "--horizon", "60"});
  CHECK(flt.code == kExitOk);
  const auto pos = flt.out.find("|x_1 - 0.45| = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(flt.out.substr(pos + 15)) < 1e-12);

  const auto unknown = invoke({"example", "nope"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("paper-asymptotic") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"--help"}).code == kExitOk);
}
