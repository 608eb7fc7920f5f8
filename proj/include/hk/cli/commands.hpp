#pragma once

#include "hk/analysis.hpp"
#include "hk/ensemble.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hk::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitCapacity = 3,
};

/// Overrides the built-in default horizon when set.
inline constexpr const char* kHorizonEnvVar = "HK_DEFAULT_HORIZON";

/// Explicit value, else the environment override, else default_horizon(n).
std::size_t resolve_horizon(std::optional<std::size_t> requested, std::size_t agents);

/// Comma-separated check names, or "all".
std::vector<CheckId> parse_check_list(const std::string& text);

struct SimulateArgs {
  std::filesystem::path instance;
  Engine engine = Engine::exact;
  std::optional<std::size_t> horizon;
  bool stop_at_fixed_point = false;
  std::optional<std::filesystem::path> out;
  bool rational_output = false;
  int digits = 17;
  std::size_t denominator_cap_bits = kDefaultDenominatorCapBits;
};

struct VerifyArgs {
  std::filesystem::path instance;
  std::string checks = "all";
  Engine engine = Engine::exact;
  std::optional<std::size_t> horizon;
  AnalysisOptions analysis;
  /// Checks a recorded trajectory CSV instead of simulating.
  std::optional<std::filesystem::path> replay;
  std::optional<std::filesystem::path> out;
  std::size_t denominator_cap_bits = kDefaultDenominatorCapBits;
};

struct EnsembleArgs {
  std::optional<std::filesystem::path> spec;
  std::optional<std::filesystem::path> instance;
  std::optional<std::size_t> count;
  std::optional<std::string> n_range;
  std::optional<std::string> bound_range;
  std::optional<std::string> spread_cap;
  std::optional<std::uint32_t> grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<std::size_t> horizon;
  std::optional<std::string> checks;
  std::optional<std::size_t> window;
  bool homogeneous = false;
  std::optional<std::size_t> denominator_cap_bits;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out;
};

struct ExampleArgs {
  std::string name;
  std::optional<Engine> engine;
  std::optional<std::size_t> horizon;
};

/// Spec file values first, then inline flags on top.
EnsembleSpec resolve_ensemble_spec(const EnsembleArgs& args);

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_ensemble(const EnsembleArgs& args, std::ostream& out, std::ostream& err);
int cmd_example(const ExampleArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hk::cli
