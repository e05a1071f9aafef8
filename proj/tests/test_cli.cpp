// Runs the specpb executable end to end on the shipped configs.
#include "specpb/report.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using specpb::Json;

namespace {

const fs::path kConfigs = SPECPB_CONFIGS;
const fs::path kScratch = SPECPB_SCRATCH;

int run_cli(const std::string& args, const std::string& tag) {
  fs::create_directories(kScratch);
  const fs::path log = kScratch / (tag + ".log");
  const std::string cmd = std::string("\"") + SPECPB_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const char* name) { return "--config \"" + (kConfigs / name).string() + "\""; }
std::string out(const std::string& tag) { return "--out \"" + (kScratch / tag).string() + "\""; }

}  // namespace

TEST_CASE("killer-certify writes every format and exits 0") {
  fs::remove_all(kScratch / "certify");
  CHECK(run_cli("killer-certify " + config("killer_certify.json") + " " + out("certify"), "certify") == 0);
  for (const char* f : {"certificate.json", "certificate.csv", "certificate.md"}) {
    CHECK(fs::exists(kScratch / "certify" / f));
  }
  const Json report = Json::parse(slurp(kScratch / "certify" / "certificate.json"));
  CHECK(report["status"] == "CERTIFIED");
  CHECK(specpb::validate_report(report).empty());
}

TEST_CASE("killer-certify --probe refutes with exit code 2") {
  CHECK(run_cli("killer-certify " + config("killer_certify.json") + " --probe -0.1 --format json " + out("probe_flag"),
                "probe_flag") == 2);
  const Json report = Json::parse(slurp(kScratch / "probe_flag" / "probe.json"));
  CHECK(report["status"] == "REFUTED");
  CHECK(report["result"]["offender"]["action_approx"] == 0.0256637061436);
}

TEST_CASE("killer-probe config") {
  CHECK(run_cli(config("killer_probe.json") + " --format json " + out("probe"), "probe") == 2);
}

TEST_CASE("bound-propagate") {
  CHECK(run_cli("bound-propagate " + config("bound_propagate.json") + " " + out("bound"), "bound") == 0);
  const Json report = Json::parse(slurp(kScratch / "bound" / "bound_trace.json"));
  CHECK(report["result"]["final"]["interval"]["text"] == "[0, 9/100*pi]");
  CHECK(fs::exists(kScratch / "bound" / "trace.json"));
  CHECK(specpb::validate_report(report).empty());
}

TEST_CASE("cover commands") {
  CHECK(run_cli("cover-analyze " + config("cover_analyze.json") + " " + out("analyze"), "analyze") == 0);
  CHECK(run_cli("cover-pb " + config("cover_pb.json") + " --grid 64 --format json,csv " + out("pb"), "pb") == 0);
  CHECK(fs::exists(kScratch / "pb" / "nu_field.csv"));
  const Json report = Json::parse(slurp(kScratch / "pb" / "cover_pb.json"));
  CHECK(report["status"] == "PASS");
  CHECK(report["seed"] == 1);
}

TEST_CASE("invalid input exits 3") {
  CHECK(run_cli("--config /nonexistent/cfg.json", "missing") == 3);
  CHECK(run_cli("cover-pb " + config("killer_certify.json"), "mismatch") == 3);
  CHECK(run_cli(config("killer_certify.json") + " --grid 64 " + out("badgrid"), "badgrid") == 3);
  CHECK(run_cli(config("killer_certify.json") + " --probe 0.5 " + out("badprobe"), "badprobe") == 3);
  CHECK(run_cli(config("killer_certify.json") + " --format pdf " + out("badformat"), "badformat") == 3);
  fs::create_directories(kScratch);
  {
    std::ofstream bad(kScratch / "bad.json");
    bad << R"({"killer-certify": {"lambda": "-1", "r": "0.35", "epsilon": "0.2", "E": "0.4"}})";
  }
  CHECK(run_cli("--config \"" + (kScratch / "bad.json").string() + "\"", "badcfg") == 3);
  CHECK(slurp(kScratch / "badcfg.log").find("killer-certify.epsilon") != std::string::npos);
}

TEST_CASE("schema subcommand") {
  CHECK(run_cli("schema cover-pb", "schema") == 0);
  const Json schema = Json::parse(slurp(kScratch / "schema.log"));
  CHECK(schema["type"] == "object");
  CHECK(run_cli("schema nothing", "schema_bad") == 3);
}
