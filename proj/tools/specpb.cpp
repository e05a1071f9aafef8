// specpb: spectral killer certificates, bound traces and Poisson-bracket
// cover checks from a JSON config.
//
//   specpb [command] --config cfg.json [--out dir] [--format json,csv,md]
//          [--probe a] [--seed n] [--grid n] [--exact-l-cap n]
//   specpb schema <command>

#include "specpb/report.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char c : s) {
    if (c == ',') {
      out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item += c;
    }
  }
  out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral killer certificates, bound traces and Poisson-bracket cover checks"};
  app.set_version_flag("--version", "specpb 1.0.0");

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string formats;
  std::string probe;
  std::uint64_t seed = 0;
  int grid = 0;
  int exact_cap = 0;

  app.add_option("command", command, "killer-certify | killer-probe | cover-analyze | cover-pb | bound-propagate | schema");
  auto* config_opt = app.add_option("--config", config_path, "JSON config with exactly one command block");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: config 'output.dir' or '.')");
  auto* format_opt = app.add_option("--format", formats, "comma-separated subset of json,csv,md");
  auto* probe_opt = app.add_option("--probe", probe, "middle plateau value a for killer-probe");
  auto* seed_opt = app.add_option("--seed", seed, "seed recorded in reports and used by heuristic searches");
  auto* grid_opt = app.add_option("--grid", grid, "grid resolution for cover-pb");
  auto* cap_opt = app.add_option("--exact-l-cap", exact_cap, "largest active-set size solved exactly by cover-pb");
  app.allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  if (command == "schema") {
    const auto& extras = app.remaining();
    for (const auto& name : specpb::command_names()) {
      if (!extras.empty() && extras.front() == name) {
        for (auto c : {specpb::Command::KillerCertify, specpb::Command::KillerProbe, specpb::Command::CoverAnalyze,
                       specpb::Command::CoverPb, specpb::Command::BoundPropagate}) {
          if (specpb::command_name(c) == name) std::cout << specpb::report_schema(c).dump(2) << "\n";
        }
        return 0;
      }
    }
    std::cerr << "usage: specpb schema <command>\n";
    return 3;
  }
  if (!app.remaining().empty()) {
    std::cerr << "unexpected arguments:";
    for (const auto& r : app.remaining()) std::cerr << " " << r;
    std::cerr << "\n";
    return 3;
  }
  if (!*config_opt) {
    std::cerr << "--config is required\n" << app.help();
    return 3;
  }

  try {
    specpb::RunConfig config = specpb::parse_config(std::filesystem::path(config_path));
    if (!command.empty() && command != specpb::command_name(config.command)) {
      std::cerr << "command '" << command << "' does not match the config block '"
                << specpb::command_name(config.command) << "'\n";
      return 3;
    }
    specpb::CliOverrides o;
    if (*out_opt) o.out = out_dir;
    if (*format_opt) o.formats = split_commas(formats);
    if (*probe_opt) o.probe = probe;
    if (*seed_opt) o.seed = seed;
    if (*grid_opt) o.grid = grid;
    if (*cap_opt) o.exact_l_cap = exact_cap;
    specpb::apply_overrides(config, o);

    const specpb::RunResult result = specpb::run(config);
    std::cout << result.summary;
    for (const auto& p : result.written) std::cout << "wrote " << p.string() << "\n";
    for (const auto& e : result.report["errors"]) std::cerr << "error: " << e.get<std::string>() << "\n";
    return result.exit_code;
  } catch (const specpb::FieldErrors& e) {
    for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
