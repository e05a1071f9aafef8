#include "specpb/report.hpp"

#include <doctest.h>

using namespace specpb;

namespace {

Json killer_block() {
  return Json::parse(R"({"n": 1, "lambda": "-1", "N": 1, "r": "0.35", "epsilon": "0.05", "E": "0.4", "tau": "1e-6"})");
}

Json cover_json(int k) { return to_json(torus_grid_cover(k, 1.0, 1.0, 0.2)); }

std::string joined(const FieldErrors& e) {
  std::string all;
  for (const auto& m : e.errors()) all += m + "\n";
  return all;
}

std::string config_error(const Json& j) {
  try {
    parse_config(j);
  } catch (const FieldErrors& e) {
    return joined(e);
  }
  return {};
}

}  // namespace

TEST_CASE("killer config defaults") {
  Json block = killer_block();
  block.erase("tau");
  block.erase("N");
  const RunConfig c = parse_config(Json{{"killer-certify", block}});
  CHECK(c.command == Command::KillerCertify);
  CHECK(c.killer.input.model.chern_gen == 1);
  CHECK_FALSE(c.killer.input.tau);
  CHECK(c.killer.input.effective_tau() == PiRational::pi_times(parse_rational("1.225e-7")));
  CHECK(c.killer.input.h_max == PiRational(0));
  CHECK(c.output.formats == std::vector<std::string>{"json", "md"});
  CHECK(c.seed == 0);
}

TEST_CASE("config errors carry field paths") {
  Json block = killer_block();
  block["epsilon"] = "0.1";
  const std::string e = config_error(Json{{"killer-certify", block}});
  CHECK(e.find("killer-certify.epsilon") != std::string::npos);

  block = killer_block();
  block.erase("r");
  block["colour"] = "blue";
  const std::string two = config_error(Json{{"killer-certify", block}});
  CHECK(two.find("killer-certify.r") != std::string::npos);
  CHECK(two.find("killer-certify.colour") != std::string::npos);

  const std::string unknown = config_error(Json{{"killer-verify", killer_block()}});
  CHECK(unknown.find("killer-verify") != std::string::npos);
  CHECK(unknown.find("killer-certify") != std::string::npos);

  CHECK_FALSE(config_error(Json{{"killer-certify", killer_block()}, {"cover-pb", Json::object()}}).empty());
  CHECK_FALSE(config_error(Json{{"killer-certify", killer_block()}, {"output", {{"formats", {"pdf"}}}}}).empty());
  CHECK_FALSE(config_error(Json::object()).empty());
}

TEST_CASE("probe bounds are checked") {
  Json block = killer_block();
  block["probe"] = "0.2";
  CHECK(config_error(Json{{"killer-probe", block}}).find("killer-probe.probe") != std::string::npos);
  block["probe"] = "-0.1";
  CHECK(config_error(Json{{"killer-probe", block}}).empty());
}

TEST_CASE("overrides") {
  RunConfig c = parse_config(Json{{"killer-certify", killer_block()}});
  CliOverrides o;
  o.formats = std::vector<std::string>{"csv"};
  o.seed = 42;
  apply_overrides(c, o);
  CHECK(c.output.formats == std::vector<std::string>{"csv"});
  CHECK(c.seed == 42);

  CliOverrides grid;
  grid.grid = 64;
  CHECK_THROWS_AS(apply_overrides(c, grid), FieldErrors);

  CliOverrides probe;
  probe.probe = "-0.1";
  apply_overrides(c, probe);
  CHECK(c.command == Command::KillerProbe);
  CHECK(execute(c).exit_code == 2);

  RunConfig pb = parse_config(Json{{"cover-pb", {{"cover", cover_json(4)}}}});
  CliOverrides bad;
  bad.grid = 1;
  CHECK_THROWS_AS(apply_overrides(pb, bad), FieldErrors);
  CliOverrides cap;
  cap.exact_l_cap = 8;
  cap.grid = 32;
  apply_overrides(pb, cap);
  CHECK(pb.cover.exact_cap == 8);
  CHECK(pb.cover.grid == 32);
}

TEST_CASE("killer commands run with the documented exit codes") {
  const RunResult ok = execute(parse_config(Json{{"killer-certify", killer_block()}}));
  CHECK(ok.exit_code == 0);
  CHECK(ok.report["status"] == "CERTIFIED");
  CHECK(validate_report(ok.report).empty());

  Json probe = killer_block();
  probe["probe"] = "-0.1";
  const RunResult refuted = execute(parse_config(Json{{"killer-probe", probe}}));
  CHECK(refuted.exit_code == 2);
  CHECK(refuted.report["status"] == "REFUTED");
  CHECK(refuted.report["result"]["offender"]["step"] == 5);
  CHECK(validate_report(refuted.report).empty());

  Json invalid = killer_block();
  invalid["E"] = "0.3";
  CHECK(config_error(Json{{"killer-certify", invalid}}).find("killer-certify.E") != std::string::npos);

  Json window = probe;
  window["l_window"] = 0;
  const RunResult overflow = execute(parse_config(Json{{"killer-probe", window}}));
  CHECK(overflow.exit_code == 3);
  CHECK_FALSE(overflow.report["errors"].empty());
}

TEST_CASE("bound-propagate report") {
  const Json block = Json::parse(R"({"n": 1, "lambda": "-1",
      "balls": [{"id": "U1", "r": "0.2"}, {"id": "U2", "r": "0.3"}, {"id": "U3", "r": "0.25"}],
      "pb": {"d": 3, "r": "0.2"}})");
  const RunResult r = execute(parse_config(Json{{"bound-propagate", block}}));
  CHECK(r.exit_code == 0);
  CHECK(r.report["result"]["final"]["interval"]["text"] == "[0, 9/100*pi]");
  CHECK(r.report["result"]["audit"]["passed"] == true);
  CHECK(r.report["result"]["pb"]["bound"]["text"] == "25/18*pi^-1");
  CHECK(validate_report(r.report).empty());
  const BoundTrace replay = BoundTrace::from_json(r.report["result"]["trace"]);
  CHECK(replay.audit().passed);

  Json bad = block;
  bad["balls"][1]["E"] = "0.6";
  const RunResult pre = execute(parse_config(Json{{"bound-propagate", bad}}));
  CHECK(pre.exit_code == 3);
  CHECK(pre.report["errors"].dump().find("U2") != std::string::npos);
}

TEST_CASE("cover commands") {
  const RunResult a = execute(parse_config(Json{{"cover-analyze", {{"cover", cover_json(4)}}}}));
  CHECK(a.exit_code == 0);
  CHECK(a.report["result"]["graph"]["d"] == 8);
  CHECK(validate_report(a.report).empty());

  const RunResult pb = execute(parse_config(Json{{"cover-pb", {{"cover", cover_json(4)}, {"grid", 96}}}}));
  CHECK(pb.exit_code == 0);
  CHECK(pb.report["status"] == "PASS");
  CHECK(validate_report(pb.report).empty());

  Json gap = Json::parse(R"({"domain": {"torus": [1, 1]}, "balls": [{"c": [0.25, 0.25], "r": 0.2}]})");
  const RunResult g = execute(parse_config(Json{{"cover-pb", {{"cover", gap}, {"grid", 32}}}}));
  CHECK(g.exit_code == 3);
  CHECK(g.report["errors"].dump().find("no ball") != std::string::npos);

  const RunResult wide =
      execute(parse_config(Json{{"cover-pb", {{"cover", cover_json(4)}, {"grid", 32}, {"support_scale", 1.3}}}}));
  CHECK(wide.exit_code == 0);
  CHECK(wide.report["status"] == "SKIPPED");
}

TEST_CASE("reports are byte-identical across runs") {
  const RunConfig c = parse_config(Json{{"cover-pb", {{"cover", cover_json(4)}, {"grid", 64}}}, {"seed", 9}});
  const RunResult a = execute(c), b = execute(c);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].second == b.files[i].second);
  const RunConfig k = parse_config(Json{{"killer-certify", killer_block()}, {"output", {{"formats", {"json", "csv", "md"}}}}});
  const RunResult x = execute(k), y = execute(k);
  CHECK(x.files.size() == 3);
  for (std::size_t i = 0; i < x.files.size(); ++i) CHECK(x.files[i].second == y.files[i].second);
}

TEST_CASE("schemas reject malformed reports") {
  const RunResult ok = execute(parse_config(Json{{"killer-certify", killer_block()}}));
  Json broken = ok.report;
  broken["exit_code"] = "zero";
  CHECK_FALSE(validate_report(broken).empty());
  broken = ok.report;
  broken.erase("result");
  CHECK_FALSE(validate_report(broken).empty());
  broken = ok.report;
  broken["status"] = "MAYBE";
  CHECK_FALSE(validate_report(broken).empty());
  for (Command c : {Command::KillerCertify, Command::KillerProbe, Command::CoverAnalyze, Command::CoverPb,
                    Command::BoundPropagate}) {
    const Json s = report_schema(c);
    CHECK(s["type"] == "object");
    CHECK(s.contains("required"));
  }
}
