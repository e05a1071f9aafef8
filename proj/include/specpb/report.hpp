// Run configuration, command dispatch and report emission for the specpb CLI.
//
// A config file holds exactly one command block keyed by the command name,
// plus optional "output" and "seed" entries:
//
//   {"killer-certify": {"lambda": "-1", "r": "0.35", "epsilon": "0.05", "E": "0.4"},
//    "output": {"dir": "out", "formats": ["json", "md"]}, "seed": 7}
#pragma once

#include "specpb/calculus.hpp"
#include "specpb/certifier.hpp"
#include "specpb/cover.hpp"
#include "specpb/json_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace specpb {

enum class Command { KillerCertify, KillerProbe, CoverAnalyze, CoverPb, BoundPropagate };

std::string command_name(Command c);
const std::vector<std::string>& command_names();

struct KillerBlock {
  CertificationInput input;
  std::optional<PiRational> probe;  ///< killer-probe only
};

struct CoverBlock {
  BallCover cover;
  Cutoff cutoff = Cutoff::Polynomial;
  double support_scale = 1.0;
  int grid = 512;
  int exact_cap = 16;
  int restarts = 64;
  int threads = 0;
  double grid_slack = 0.01;
  bool small_energy_asserted = false;
};

struct PbRequest {
  int d = 1;
  Rational r;
};

struct BoundBlock {
  ManifoldModel model;
  std::vector<BallSpec> balls;
  TheoremBoundOptions options;
  std::optional<PbRequest> pb;
};

struct OutputSpec {
  std::filesystem::path dir = ".";
  std::vector<std::string> formats = {"json", "md"};
};

struct RunConfig {
  Command command = Command::KillerCertify;
  KillerBlock killer;
  CoverBlock cover;
  BoundBlock bounds;
  OutputSpec output;
  std::uint64_t seed = 0;
  Json source;  ///< the validated command block, echoed into reports
};

/// Parses and validates a config.  All problems are collected and thrown
/// together as FieldErrors with "path: message" entries.
RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir = ".");
RunConfig parse_config(const std::filesystem::path& path);

/// Command-line flags that take precedence over the config file.
struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::vector<std::string>> formats;
  std::optional<std::string> probe;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<int> exact_l_cap;
};

/// Applies overrides and revalidates the affected fields.
void apply_overrides(RunConfig& config, const CliOverrides& overrides);

struct RunResult {
  int exit_code = 1;   ///< 0 success, 2 refuted / bound FAIL, 3 invalid input, 1 internal
  Json report;
  std::string summary; ///< human-readable lines for standard output
  /// (file name, contents) for every requested format
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::filesystem::path> written;
};

/// Runs the command without touching the file system.
RunResult execute(const RunConfig& config);
/// execute() plus writing every requested format into config.output.dir.
RunResult run(const RunConfig& config);

/// Published JSON schema of the report of one command.
Json report_schema(Command c);
/// Violations of report_schema for the report's "command"; empty if valid.
std::vector<std::string> validate_report(const Json& report);

}  // namespace specpb
