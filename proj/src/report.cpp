#include "specpb/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace specpb {

namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<std::pair<Command, std::string>>& command_table() {
  static const std::vector<std::pair<Command, std::string>> table = {
      {Command::KillerCertify, "killer-certify"}, {Command::KillerProbe, "killer-probe"},
      {Command::CoverAnalyze, "cover-analyze"},   {Command::CoverPb, "cover-pb"},
      {Command::BoundPropagate, "bound-propagate"},
  };
  return table;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string fmt(double x) { return Json(round12(x)).dump(); }

/// Reads fields of one JSON object, collecting every problem under `path`.
class FieldReader {
public:
  FieldReader(const Json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {}

  std::string at(const std::string& key) const { return path_ + "." + key; }
  void error(const std::string& key, const std::string& msg) const { errors_.push_back(at(key) + ": " + msg); }
  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  template <typename Parse>
  auto read(const std::string& key, Parse parse) -> std::optional<decltype(parse(Json()))> {
    if (!has(key)) return std::nullopt;
    try {
      return parse(obj_.at(key));
    } catch (const std::exception& e) {
      error(key, e.what());
      return std::nullopt;
    }
  }

  std::optional<Rational> rational(const std::string& key) {
    return read(key, [](const Json& j) {
      if (!j.is_string() && !j.is_number()) throw InvalidParameter("expected an exact number (string or number)");
      return rational_from_json(j);
    });
  }
  std::optional<PiRational> pi_rational(const std::string& key) {
    return read(key, [](const Json& j) { return pi_rational_from_json(j); });
  }
  std::optional<std::int64_t> integer(const std::string& key) {
    return read(key, [](const Json& j) {
      if (!j.is_number_integer()) throw InvalidParameter("expected an integer");
      return j.get<std::int64_t>();
    });
  }
  std::optional<double> real(const std::string& key) {
    return read(key, [](const Json& j) {
      if (!j.is_number()) throw InvalidParameter("expected a number");
      return j.get<double>();
    });
  }
  std::optional<bool> boolean(const std::string& key) {
    return read(key, [](const Json& j) {
      if (!j.is_boolean()) throw InvalidParameter("expected true or false");
      return j.get<bool>();
    });
  }
  std::optional<std::string> string(const std::string& key) {
    return read(key, [](const Json& j) {
      if (!j.is_string()) throw InvalidParameter("expected a string");
      return j.get<std::string>();
    });
  }

  template <typename T>
  T require(std::optional<T> value, const std::string& key) {
    if (!value) {
      if (!obj_.contains(key)) error(key, "missing required field");
      return T{};
    }
    return *value;
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) errors_.push_back(at(key) + ": unknown field");
    }
  }

private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

ManifoldModel read_model(FieldReader& rd, std::vector<std::string>& errors, const std::string& block) {
  ManifoldModel m;
  m.n = static_cast<int>(rd.integer("n").value_or(1));
  if (m.n < 1) rd.error("n", "must be >= 1");
  m.chern_gen = rd.integer("N").value_or(1);
  if (m.chern_gen < 1) rd.error("N", "must be >= 1");
  const std::string mode = rd.string("mode").value_or("monotone");
  if (mode == "monotone") {
    m.mode = ManifoldMode::Monotone;
  } else if (mode == "aspherical") {
    m.mode = ManifoldMode::Aspherical;
  } else {
    rd.error("mode", "must be 'monotone' or 'aspherical'");
  }
  const auto lambda = rd.rational("lambda");
  if (lambda) m.lambda = *lambda;
  if (m.mode == ManifoldMode::Monotone && !lambda && !rd.has("lambda")) {
    errors.push_back(block + ".lambda: missing required field (monotone mode)");
  } else if (m.mode == ManifoldMode::Monotone && lambda && *lambda == 0) {
    rd.error("lambda", "must be nonzero on a monotone manifold");
  }
  return m;
}

void check_probe(const KillerBlock& k, const std::string& block, std::vector<std::string>& errors) {
  if (!k.probe) return;
  const PiRational area = PiRational::pi_times(k.input.r * k.input.r);
  if (*k.probe < -area || k.probe->sign() > 0) errors.push_back(block + ".probe: must lie in [-pi r^2, 0]");
}

KillerBlock read_killer(const Json& j, const std::string& block, bool probe_allowed, std::vector<std::string>& errors) {
  KillerBlock k;
  if (!j.is_object()) {
    errors.push_back(block + ": expected an object");
    return k;
  }
  FieldReader rd(j, block, errors);
  CertificationInput& in = k.input;
  in.model = read_model(rd, errors, block);
  const auto r = rd.rational("r");
  const auto eps = rd.rational("epsilon");
  const auto E = rd.pi_rational("E");
  in.r = rd.require(r, "r");
  in.eps = rd.require(eps, "epsilon");
  in.E = rd.require(E, "E");
  in.tau = rd.pi_rational("tau");
  in.h_max = rd.pi_rational("h_max").value_or(PiRational(0));
  in.m = rd.pi_rational("m");
  in.plateau = rd.pi_rational("plateau");
  in.l_window = rd.integer("l_window");
  if (probe_allowed) k.probe = rd.pi_rational("probe");
  rd.finish();

  if (r && *r <= 0) rd.error("r", "must be positive");
  if (r && eps && (*eps <= 0 || *eps * 4 >= *r)) rd.error("epsilon", "must satisfy 0 < epsilon < r/4");
  if (E && E->sign() <= 0) rd.error("E", "must be positive");
  if (r && E && *r > 0 && in.model.mode == ManifoldMode::Monotone) {
    if (PiRational::pi_times(*r * *r) > *E) rd.error("E", "must be at least pi r^2 (energy-capacity)");
    if (in.model.lambda != 0 && PiRational(abs(in.model.lambda) / 2) <= *E) rd.error("E", "must be below |lambda|/2");
  }
  if (in.tau && (in.tau->sign() <= 0 || (E && *in.tau >= *E))) rd.error("tau", "must satisfy 0 < tau < E");
  if (in.h_max.sign() < 0) rd.error("h_max", "must be nonnegative");
  if (in.l_window && *in.l_window < 0) rd.error("l_window", "must be nonnegative");
  if (r && in.plateau) {
    const PiRational area = PiRational::pi_times(*r * *r);
    if (*in.plateau < -area || in.plateau->sign() > 0) rd.error("plateau", "must lie in [-pi r^2, 0]");
  }
  if (r) check_probe(k, block, errors);
  if (in.m && errors.empty()) {
    for (const auto& v : check_preconditions(in)) {
      if (v.rfind("m ", 0) == 0) rd.error("m", v);
    }
  }
  return k;
}

CoverBlock read_cover(const Json& j, const std::string& block, bool numerics, const fs::path& base_dir,
                      std::vector<std::string>& errors) {
  CoverBlock c;
  if (!j.is_object()) {
    errors.push_back(block + ": expected an object");
    return c;
  }
  FieldReader rd(j, block, errors);
  const bool inline_cover = rd.has("cover");
  const auto file = rd.string("cover_file");
  if (inline_cover == file.has_value()) {
    errors.push_back(block + ": give exactly one of 'cover' and 'cover_file'");
  } else {
    try {
      Json cover_json;
      if (inline_cover) {
        cover_json = rd.raw("cover");
      } else {
        const fs::path p = fs::path(*file).is_absolute() ? fs::path(*file) : base_dir / *file;
        std::ifstream in(p);
        if (!in) throw InvalidParameter("cannot read cover file '" + p.string() + "'");
        cover_json = Json::parse(in);
      }
      c.cover = cover_from_json(cover_json);
    } catch (const FieldErrors& e) {
      for (const auto& msg : e.errors()) errors.push_back(block + ".cover." + msg);
    } catch (const std::exception& e) {
      errors.push_back(block + ".cover: " + e.what());
    }
  }
  if (numerics) {
    if (const auto cutoff = rd.string("cutoff")) {
      try {
        c.cutoff = cutoff_from_string(*cutoff);
      } catch (const std::exception& e) {
        rd.error("cutoff", e.what());
      }
    }
    c.support_scale = rd.real("support_scale").value_or(1.0);
    if (!(c.support_scale > 0)) rd.error("support_scale", "must be positive");
    c.grid = static_cast<int>(rd.integer("grid").value_or(512));
    if (c.grid < 2 || c.grid > 8192) rd.error("grid", "must lie in [2, 8192]");
    c.exact_cap = static_cast<int>(rd.integer("exact_cap").value_or(16));
    if (c.exact_cap < 0 || c.exact_cap > 24) rd.error("exact_cap", "must lie in [0, 24]");
    c.restarts = static_cast<int>(rd.integer("restarts").value_or(64));
    if (c.restarts < 1) rd.error("restarts", "must be >= 1");
    c.threads = static_cast<int>(rd.integer("threads").value_or(0));
    if (c.threads < 0) rd.error("threads", "must be >= 0");
    c.grid_slack = rd.real("grid_slack").value_or(0.01);
    if (!(c.grid_slack >= 0 && c.grid_slack < 1)) rd.error("grid_slack", "must lie in [0, 1)");
    c.small_energy_asserted = rd.boolean("small_energy_asserted").value_or(false);
  }
  rd.finish();
  return c;
}

BoundBlock read_bounds(const Json& j, const std::string& block, std::vector<std::string>& errors) {
  BoundBlock b;
  if (!j.is_object()) {
    errors.push_back(block + ": expected an object");
    return b;
  }
  FieldReader rd(j, block, errors);
  b.model = read_model(rd, errors, block);
  if (!rd.has("balls") || !rd.raw("balls").is_array() || rd.raw("balls").empty()) {
    errors.push_back(block + ".balls: expected a nonempty array");
  } else {
    const Json& balls = rd.raw("balls");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < balls.size(); ++i) {
      const std::string path = block + ".balls[" + std::to_string(i) + "]";
      if (!balls[i].is_object()) {
        errors.push_back(path + ": expected an object");
        continue;
      }
      FieldReader br(balls[i], path, errors);
      BallSpec spec;
      spec.id = br.string("id").value_or("U" + std::to_string(i + 1));
      const auto r = br.rational("r");
      spec.r = br.require(r, "r");
      if (r && *r <= 0) br.error("r", "must be positive");
      spec.E = br.pi_rational("E").value_or(PiRational::pi_times(spec.r * spec.r));
      br.finish();
      if (!ids.insert(spec.id).second) br.error("id", "duplicate ball id '" + spec.id + "'");
      b.balls.push_back(std::move(spec));
    }
  }
  const std::string killers = rd.string("killers").value_or("assumed");
  if (killers == "assumed") {
    b.options.killers = KillerSource::Assumed;
  } else if (killers == "certified") {
    b.options.killers = KillerSource::Certified;
  } else {
    rd.error("killers", "must be 'assumed' or 'certified'");
  }
  if (const auto f = rd.rational("eps_fraction")) {
    if (*f <= 0 || *f * 4 >= 1) {
      rd.error("eps_fraction", "must lie in (0, 1/4)");
    } else {
      b.options.eps_fraction = *f;
    }
  }
  if (rd.has("pb")) {
    const Json& pb = rd.raw("pb");
    if (!pb.is_object()) {
      errors.push_back(block + ".pb: expected an object");
    } else {
      FieldReader pr(pb, block + ".pb", errors);
      PbRequest req;
      req.d = static_cast<int>(pr.require(pr.integer("d"), "d"));
      const auto r = pr.rational("r");
      req.r = pr.require(r, "r");
      pr.finish();
      if (req.d < 1) pr.error("d", "must be >= 1");
      if (r && *r <= 0) pr.error("r", "must be positive");
      b.pb = req;
    }
  }
  rd.finish();
  return b;
}

std::vector<std::string> parse_formats(const std::vector<std::string>& formats, const std::string& path,
                                       std::vector<std::string>& errors) {
  std::vector<std::string> out;
  for (const auto& f : formats) {
    if (f != "json" && f != "csv" && f != "md") {
      errors.push_back(path + ": unknown format '" + f + "' (expected json, csv, md)");
    } else if (std::find(out.begin(), out.end(), f) == out.end()) {
      out.push_back(f);
    }
  }
  if (out.empty() && errors.empty()) errors.push_back(path + ": at least one format is required");
  return out;
}

bool wants(const RunConfig& c, const std::string& format) {
  return std::find(c.output.formats.begin(), c.output.formats.end(), format) != c.output.formats.end();
}

}  // namespace

std::string command_name(Command c) {
  for (const auto& [cmd, name] : command_table()) {
    if (cmd == c) return name;
  }
  return "?";
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [_, name] : command_table()) out.push_back(name);
    return out;
  }();
  return names;
}

RunConfig parse_config(const Json& j, const fs::path& base_dir) {
  std::vector<std::string> errors;
  RunConfig config;
  if (!j.is_object()) throw FieldErrors({"config: expected a JSON object"});

  std::vector<std::pair<Command, std::string>> blocks;
  for (const auto& [key, _] : j.items()) {
    if (key == "output" || key == "seed") continue;
    const auto it = std::find_if(command_table().begin(), command_table().end(),
                                 [&](const auto& entry) { return entry.second == key; });
    if (it == command_table().end()) {
      errors.push_back(key + ": unknown command or field (valid commands: " + join(command_names(), ", ") +
                       "; other keys: output, seed)");
    } else {
      blocks.push_back(*it);
    }
  }
  if (blocks.size() != 1) {
    errors.push_back("config: exactly one command block is required, found " + std::to_string(blocks.size()) +
                     " (valid commands: " + join(command_names(), ", ") + ")");
  } else {
    const auto [command, name] = blocks.front();
    config.command = command;
    const Json& block = j.at(name);
    config.source = block;
    switch (command) {
      case Command::KillerCertify: config.killer = read_killer(block, name, false, errors); break;
      case Command::KillerProbe: config.killer = read_killer(block, name, true, errors); break;
      case Command::CoverAnalyze: config.cover = read_cover(block, name, false, base_dir, errors); break;
      case Command::CoverPb: config.cover = read_cover(block, name, true, base_dir, errors); break;
      case Command::BoundPropagate: config.bounds = read_bounds(block, name, errors); break;
    }
  }

  if (j.contains("seed")) {
    if (j.at("seed").is_number_unsigned() || (j.at("seed").is_number_integer() && j.at("seed").get<std::int64_t>() >= 0)) {
      config.seed = j.at("seed").get<std::uint64_t>();
    } else {
      errors.push_back("seed: expected a nonnegative integer");
    }
  }
  if (j.contains("output")) {
    const Json& out = j.at("output");
    if (!out.is_object()) {
      errors.push_back("output: expected an object");
    } else {
      FieldReader rd(out, "output", errors);
      if (const auto dir = rd.string("dir")) {
        const fs::path p(*dir);
        config.output.dir = p.is_absolute() ? p : base_dir / p;
      }
      if (rd.has("formats")) {
        const Json& f = rd.raw("formats");
        if (!f.is_array() || !std::all_of(f.begin(), f.end(), [](const Json& x) { return x.is_string(); })) {
          errors.push_back("output.formats: expected an array of strings");
        } else {
          config.output.formats = parse_formats(f.get<std::vector<std::string>>(), "output.formats", errors);
        }
      }
      rd.finish();
    }
  }
  if (!errors.empty()) throw FieldErrors(std::move(errors));
  return config;
}

RunConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FieldErrors({"config: cannot open '" + path.string() + "'"});
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FieldErrors({"config: invalid JSON: " + std::string(e.what())});
  }
  return parse_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void apply_overrides(RunConfig& config, const CliOverrides& o) {
  std::vector<std::string> errors;
  const std::string block = command_name(config.command);
  if (o.out) config.output.dir = *o.out;
  if (o.formats) config.output.formats = parse_formats(*o.formats, "--format", errors);
  if (o.seed) config.seed = *o.seed;
  if (o.probe) {
    if (config.command != Command::KillerProbe && config.command != Command::KillerCertify) {
      errors.push_back("--probe: only applies to killer-certify and killer-probe");
    } else {
      // killer-certify --probe a runs the probe on the same scenario
      config.command = Command::KillerProbe;
      try {
        config.killer.probe = PiRational(parse_rational(*o.probe));
        check_probe(config.killer, "--probe", errors);
      } catch (const std::exception& e) {
        errors.push_back(std::string("--probe: ") + e.what());
      }
    }
  }
  if (o.grid) {
    if (config.command != Command::CoverPb) {
      errors.push_back("--grid: only applies to cover-pb");
    } else if (*o.grid < 2 || *o.grid > 8192) {
      errors.push_back("--grid: must lie in [2, 8192]");
    } else {
      config.cover.grid = *o.grid;
    }
  }
  if (o.exact_l_cap) {
    if (config.command != Command::CoverPb) {
      errors.push_back("--exact-l-cap: only applies to cover-pb");
    } else if (*o.exact_l_cap < 0 || *o.exact_l_cap > 24) {
      errors.push_back("--exact-l-cap: must lie in [0, 24]");
    } else {
      config.cover.exact_cap = *o.exact_l_cap;
    }
  }
  if (!errors.empty()) throw FieldErrors(std::move(errors));
}

// ---------------------------------------------------------------------------
// Execution

namespace {

Json envelope(const RunConfig& c) {
  Json j;
  j["command"] = command_name(c.command);
  j["schema_version"] = kSchemaVersion;
  j["seed"] = c.seed;
  j["status"] = "";
  j["exit_code"] = 1;
  j["config"] = c.source;
  j["errors"] = Json::array();
  j["result"] = nullptr;
  return j;
}

void finish(RunResult& r, const std::string& status, int exit_code) {
  r.exit_code = exit_code;
  r.report["status"] = status;
  r.report["exit_code"] = exit_code;
}

int certificate_exit(CertStatus s) {
  switch (s) {
    case CertStatus::Certified: return 0;
    case CertStatus::Refuted: return 2;
    case CertStatus::InvalidInput: return 3;
  }
  return 1;
}

void run_killer(const RunConfig& c, RunResult& out) {
  const bool probe = c.command == Command::KillerProbe;
  if (probe && !c.killer.probe) {
    out.report["errors"].push_back("killer-probe.probe: missing (set it in the config or pass --probe)");
    finish(out, "INVALID_INPUT", 3);
    return;
  }
  SpectralCertificate cert;
  try {
    cert = probe ? probe_plateau(c.killer.input, *c.killer.probe) : certify(c.killer.input);
  } catch (const WindowOverflow& e) {
    cert.input = c.killer.input;
    cert.status = CertStatus::InvalidInput;
    cert.violations = {e.what()};
  } catch (const InvalidParameter& e) {
    cert.input = c.killer.input;
    cert.status = CertStatus::InvalidInput;
    cert.violations = {e.what()};
  }
  Json result = to_json(cert);
  if (probe) result["probe"] = pi_rational_json(*c.killer.probe);
  out.report["result"] = std::move(result);
  for (const auto& v : cert.violations) out.report["errors"].push_back(v);
  finish(out, to_string(cert.status), certificate_exit(cert.status));

  std::ostringstream s;
  s << command_name(c.command) << ": " << to_string(cert.status) << "\n";
  for (const auto& v : cert.violations) s << "  violation: " << v << "\n";
  if (cert.status != CertStatus::InvalidInput) {
    s << "  m = " << cert.chosen_m.to_string() << " (~" << fmt(cert.chosen_m.approx()) << ")\n";
    s << "  index-n rows: " << cert.table.size() << "\n";
  }
  if (cert.offender) {
    s << "  offender: step " << cert.offender->step << ", winding " << cert.offender->winding() << ", action "
      << cert.offender->action.to_string() << " (~" << fmt(cert.offender->action.approx()) << ")\n";
  }
  out.summary = s.str();

  const std::string stem = probe ? "probe" : "certificate";
  if (wants(c, "json")) out.files.emplace_back(stem + ".json", out.report.dump(2) + "\n");
  if (wants(c, "csv")) out.files.emplace_back(stem + ".csv", certificate_csv(cert));
  if (wants(c, "md")) out.files.emplace_back(stem + ".md", certificate_markdown(cert));
}

std::string cover_markdown(const BallCover& cover, const IntersectionGraph& g, const Coloring& col, bool disjoint) {
  std::ostringstream os;
  os << "# Cover analysis\n\n";
  os << "| quantity | value |\n|---|---|\n";
  os << "| balls | " << cover.size() << " |\n";
  os << "| max radius | " << fmt(cover.max_radius()) << " |\n";
  os << "| edges | " << g.edge_count() << " |\n";
  os << "| d | " << g.max_degree << " |\n";
  os << "| families | " << col.families.size() << " (bound d+1 = " << g.max_degree + 1 << ") |\n";
  os << "| families pairwise disjoint | " << (disjoint ? "yes" : "no") << " |\n";
  os << "\n## Families\n\n";
  for (std::size_t f = 0; f < col.families.size(); ++f) {
    std::vector<std::string> ids;
    for (int b : col.families[f]) ids.push_back(cover.balls[b].id);
    os << "- W_" << f + 1 << ": " << join(ids, ", ") << "\n";
  }
  return os.str();
}

std::string cover_csv(const BallCover& cover, const IntersectionGraph& g, const Coloring& col) {
  std::ostringstream os;
  os << "index,id,x,y,r,degree,family\n";
  for (std::size_t i = 0; i < cover.size(); ++i) {
    const auto& b = cover.balls[i];
    os << i << ',' << b.id << ',' << fmt(b.c.x()) << ',' << fmt(b.c.y()) << ',' << fmt(b.r) << ','
       << g.adjacency[i].size() << ',' << col.color[i] + 1 << '\n';
  }
  return os.str();
}

void run_cover_analyze(const RunConfig& c, RunResult& out) {
  const BallCover& cover = c.cover.cover;
  const auto g = intersection_graph(cover);
  const auto col = color_disjoint_families(cover, g);
  const bool disjoint = families_disjoint(cover, col);
  const bool within = static_cast<int>(col.families.size()) <= g.max_degree + 1;
  Json result;
  result["cover"] = to_json(cover);
  result["graph"] = to_json(g, col);
  result["families_disjoint"] = disjoint;
  result["color_bound_holds"] = within;
  out.report["result"] = std::move(result);
  const bool ok = disjoint && within;
  if (!ok) out.report["errors"].push_back("coloring check failed");
  finish(out, ok ? "OK" : "ERROR", ok ? 0 : 1);

  std::ostringstream s;
  s << "cover-analyze: " << cover.size() << " balls, d = " << g.max_degree << ", " << col.families.size()
    << " disjoint families" << (disjoint ? "" : " (NOT disjoint)") << "\n";
  out.summary = s.str();
  if (wants(c, "json")) out.files.emplace_back("cover_analysis.json", out.report.dump(2) + "\n");
  if (wants(c, "csv")) out.files.emplace_back("cover_analysis.csv", cover_csv(cover, g, col));
  if (wants(c, "md")) out.files.emplace_back("cover_analysis.md", cover_markdown(cover, g, col, disjoint));
}

void run_cover_pb(const RunConfig& c, RunResult& out) {
  const CoverBlock& cb = c.cover;
  const PartitionOfUnity pou(cb.cover, cb.cutoff, cb.support_scale);
  try {
    pou.check_coverage(cb.grid);
  } catch (const NotACover& e) {
    out.report["errors"].push_back(std::string("not a cover: ") + e.what());
    out.report["result"] = Json{{"witness", {round12(e.witness().x()), round12(e.witness().y())}}};
    finish(out, "INVALID_INPUT", 3);
    out.summary = std::string("cover-pb: INVALID_INPUT (") + e.what() + ")\n";
    if (wants(c, "json")) out.files.emplace_back("cover_pb.json", out.report.dump(2) + "\n");
    return;
  }
  const auto g = intersection_graph(cb.cover);
  const auto col = color_disjoint_families(cb.cover, g);
  const PartitionCheck pc = check_partition(pou, cb.grid);
  NuOptions opts;
  opts.grid = cb.grid;
  opts.inf_one.exact_cap = cb.exact_cap;
  opts.inf_one.restarts = cb.restarts;
  opts.inf_one.seed = c.seed;
  opts.threads = cb.threads;
  opts.keep_field = wants(c, "csv");
  const NuReport nu = nu_c(pou, opts);
  const LowerBoundReport lb = check_lower_bound(pou, nu, g.max_degree, cb.small_energy_asserted, cb.grid_slack);

  Json result;
  result["cover"] = Json{{"id", cb.cover.id},
                         {"balls", cb.cover.size()},
                         {"max_radius", round12(cb.cover.max_radius())},
                         {"d", g.max_degree},
                         {"families", col.families.size()}};
  result["partition"] = Json{{"cutoff", to_string(cb.cutoff)},
                             {"support_scale", round12(cb.support_scale)},
                             {"subordinate", pc.subordinate && pou.subordinate()},
                             {"max_sum_error", round12(pc.max_sum_error)},
                             {"min_value", round12(pc.min_value)}};
  result["nu"] = to_json(nu);
  result["bound_check"] = to_json(lb);
  out.report["result"] = std::move(result);
  finish(out, to_string(lb.status), lb.status == CheckStatus::Fail ? 2 : 0);

  std::ostringstream s;
  s << "cover-pb: " << to_string(lb.status) << "\n  d = " << lb.d << ", r = " << fmt(lb.r) << ", bound = "
    << fmt(lb.bound) << "\n  nu_c = " << fmt(nu.nu_c) << " at grid " << nu.grid << "^2 ("
    << (nu.exact ? "exact" : "heuristic") << ")\n  " << lb.reason << "\n";
  out.summary = s.str();

  if (wants(c, "json")) out.files.emplace_back("cover_pb.json", out.report.dump(2) + "\n");
  if (wants(c, "csv")) {
    std::ostringstream csv;
    csv << "i,j,x,y,norm\n";
    for (int i = 0; i < nu.grid; ++i) {
      for (int j = 0; j < nu.grid; ++j) {
        const auto z = cb.cover.domain.grid_point(i, j, nu.grid);
        csv << i << ',' << j << ',' << fmt(z.x()) << ',' << fmt(z.y()) << ','
            << fmt(nu.field[static_cast<std::size_t>(i) * nu.grid + j]) << '\n';
      }
    }
    out.files.emplace_back("nu_field.csv", csv.str());
  }
  if (wants(c, "md")) {
    std::ostringstream md;
    md << "# Poisson-bracket lower bound check\n\n**Status:** " << to_string(lb.status) << "\n\n";
    md << "| quantity | value |\n|---|---|\n";
    md << "| balls | " << cb.cover.size() << " |\n| d | " << lb.d << " |\n| r (max radius) | " << fmt(lb.r)
       << " |\n| bound 1/(2 d^2 pi r^2) | " << fmt(lb.bound) << " |\n| nu_c | " << fmt(nu.nu_c)
       << " |\n| grid | " << nu.grid << " x " << nu.grid << " |\n| mode | " << (nu.exact ? "exact" : "heuristic")
       << " |\n| max active members | " << nu.max_active << " |\n| grid slack | " << fmt(lb.grid_slack)
       << " |\n| subordinate | " << (lb.subordinate ? "yes" : "no") << " |\n| E(U_i) < abs(lambda)/2 asserted | "
       << (lb.small_energy_asserted ? "yes" : "no") << " |\n| max abs(sum f_i - 1) | " << fmt(pc.max_sum_error)
       << " |\n\n" << lb.reason << "\n\nThe grid maximum underestimates the supremum of the bracket, so a PASS is "
       << "conservative.\n";
    out.files.emplace_back("cover_pb.md", md.str());
  }
}

std::vector<int> lemma_fact_ids(const BoundTrace& t) {
  std::vector<int> ids;
  for (const auto& f : t.facts()) {
    if (f.rule == Rule::InverseLowerBound || f.rule == Rule::IterateHypothesis || f.rule == Rule::NonnegLemma) {
      ids.push_back(f.id);
    }
  }
  return ids;
}

Json audit_json(const AuditReport& a) {
  return Json{{"passed", a.passed}, {"checked", a.checked}, {"hypotheses", a.hypotheses}, {"failures", a.failures}};
}

std::string trace_lines(const BoundTrace& t) {
  std::ostringstream os;
  for (const auto& f : t.facts()) {
    std::vector<std::string> prem;
    for (int p : f.premises) prem.push_back("#" + std::to_string(p));
    os << "  #" << f.id << "  " << f.quantity << " in " << f.interval.to_string() << "  [" << to_string(f.rule)
       << (prem.empty() ? "" : " <- " + join(prem, ", ")) << "]\n";
  }
  return os.str();
}

std::string trace_csv(const BoundTrace& t, const std::string& name) {
  std::ostringstream os;
  for (const auto& f : t.facts()) {
    std::vector<std::string> prem;
    for (int p : f.premises) prem.push_back(std::to_string(p));
    os << name << ',' << f.id << ",\"" << f.quantity << "\",\"" << (f.interval.lo ? f.interval.lo->to_string() : "")
       << "\",\"" << (f.interval.hi ? f.interval.hi->to_string() : "") << "\"," << to_string(f.rule) << ','
       << join(prem, " ") << '\n';
  }
  return os.str();
}

void run_bounds(const RunConfig& c, RunResult& out) {
  const BoundBlock& b = c.bounds;
  BoundTrace trace;
  try {
    trace = derive_theorem_bound(b.balls, b.model, b.options);
  } catch (const PreconditionError& e) {
    for (const auto& p : e.problems()) out.report["errors"].push_back(p);
    finish(out, "INVALID_INPUT", 3);
    out.summary = "bound-propagate: INVALID_INPUT\n";
    for (const auto& p : e.problems()) out.summary += "  " + p + "\n";
    if (wants(c, "json")) out.files.emplace_back("bound_trace.json", out.report.dump(2) + "\n");
    return;
  } catch (const InvalidParameter& e) {
    out.report["errors"].push_back(e.what());
    finish(out, "INVALID_INPUT", 3);
    out.summary = std::string("bound-propagate: INVALID_INPUT\n  ") + e.what() + "\n";
    return;
  }
  const AuditReport audit = BoundTrace::from_json(trace.to_json()).audit();
  Json result;
  result["final"] = Json{{"quantity", trace.last().quantity}, {"interval", trace.last().interval.to_json()}};
  result["audit"] = audit_json(audit);
  result["lemma_facts"] = lemma_fact_ids(trace);
  result["trace"] = trace.to_json();
  bool ok = audit.passed;
  std::optional<PbBound> pb;
  if (b.pb) {
    pb = pb_lower_bound(b.pb->d, b.pb->r);
    const AuditReport pb_audit = BoundTrace::from_json(pb->trace.to_json()).audit();
    ok = ok && pb_audit.passed;
    result["pb"] = Json{{"d", b.pb->d},
                        {"r", format_rational(b.pb->r)},
                        {"bound", pb->bound.to_json()},
                        {"audit", audit_json(pb_audit)},
                        {"trace", pb->trace.to_json()}};
  } else {
    result["pb"] = nullptr;
  }
  out.report["result"] = std::move(result);
  if (!ok) out.report["errors"].push_back("trace audit failed");
  finish(out, ok ? "OK" : "AUDIT_FAILED", ok ? 0 : 1);

  std::ostringstream s;
  s << "bound-propagate: " << (ok ? "OK" : "AUDIT_FAILED") << "\n" << trace_lines(trace);
  s << "final: " << trace.last().quantity << " in " << trace.last().interval.to_string() << "\n";
  if (pb) {
    s << "pb chain:\n" << trace_lines(pb->trace);
    s << "final: " << pb->trace.last().quantity << " in " << pb->trace.last().interval.to_string() << " (~"
      << fmt(pb->bound.approx()) << ")\n";
  }
  out.summary = s.str();

  if (wants(c, "json")) {
    out.files.emplace_back("bound_trace.json", out.report.dump(2) + "\n");
    out.files.emplace_back("trace.json", trace.to_json().dump(2) + "\n");
  }
  if (wants(c, "csv")) {
    std::string csv = "trace,fact_id,quantity,lo,hi,rule,premises\n" + trace_csv(trace, "theorem");
    if (pb) csv += trace_csv(pb->trace, "pb");
    out.files.emplace_back("bound_trace.csv", csv);
  }
  if (wants(c, "md")) {
    std::ostringstream md;
    md << "# Bound propagation\n\n**Final:** " << trace.last().quantity << " in "
       << trace.last().interval.to_string() << "\n\n**Audit:** " << (audit.passed ? "passed" : "FAILED") << " ("
       << audit.checked << " facts replayed, " << audit.hypotheses << " hypotheses)\n\n";
    md << "| # | quantity | interval | rule | premises |\n|---|---|---|---|---|\n";
    for (const auto& f : trace.facts()) {
      std::vector<std::string> prem;
      for (int p : f.premises) prem.push_back(std::to_string(p));
      md << "| " << f.id << " | " << f.quantity << " | " << f.interval.to_string() << " | " << to_string(f.rule)
         << " | " << join(prem, ", ") << " |\n";
    }
    if (pb) {
      md << "\n## Poisson-bracket chain\n\n**Final:** " << pb->trace.last().quantity << " in "
         << pb->trace.last().interval.to_string() << "\n";
    }
    out.files.emplace_back("bound_trace.md", md.str());
  }
}

}  // namespace

RunResult execute(const RunConfig& config) {
  RunResult out;
  out.report = envelope(config);
  switch (config.command) {
    case Command::KillerCertify:
    case Command::KillerProbe: run_killer(config, out); break;
    case Command::CoverAnalyze: run_cover_analyze(config, out); break;
    case Command::CoverPb: run_cover_pb(config, out); break;
    case Command::BoundPropagate: run_bounds(config, out); break;
  }
  return out;
}

RunResult run(const RunConfig& config) {
  RunResult out = execute(config);
  fs::create_directories(config.output.dir);
  for (const auto& [name, contents] : out.files) {
    const fs::path p = config.output.dir / name;
    std::ofstream f(p, std::ios::binary);
    f << contents;
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    out.written.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Schemas

namespace {

Json obj(std::initializer_list<std::pair<const char*, Json>> props, std::vector<std::string> required = {}) {
  Json p = Json::object();
  for (const auto& [k, v] : props) p[k] = v;
  if (required.empty()) {
    for (const auto& [k, _] : props) required.emplace_back(k);
  }
  return Json{{"type", "object"}, {"required", required}, {"properties", std::move(p)}};
}
Json type(const char* t) { return Json{{"type", t}}; }
Json types(std::initializer_list<const char*> ts) {
  return Json{{"type", Json(std::vector<std::string>(ts.begin(), ts.end()))}};
}
Json array_of(Json items) { return Json{{"type", "array"}, {"items", std::move(items)}}; }
Json exact() { return obj({{"rat", type("string")}, {"pi", type("string")}}); }
Json nullable(Json schema) {
  Json t = schema["type"];
  std::vector<std::string> ts = t.is_array() ? t.get<std::vector<std::string>>() : std::vector<std::string>{t};
  ts.push_back("null");
  schema["type"] = ts;
  return schema;
}
Json sym() { return obj({{"terms", type("array")}, {"text", type("string")}, {"approx", types({"number", "null"})}}); }
Json interval() { return obj({{"lo", nullable(sym())}, {"hi", nullable(sym())}, {"text", type("string")}}); }
Json trace_schema() {
  return obj({{"regions", type("array")},
              {"disjoint", type("array")},
              {"hamiltonians", type("array")},
              {"facts", array_of(obj({{"fact_id", type("integer")},
                                      {"quantity", type("string")},
                                      {"interval", interval()},
                                      {"rule", type("string")},
                                      {"premises", array_of(type("integer"))},
                                      {"params", type("object")}}))},
              {"final", nullable(obj({{"quantity", type("string")}, {"interval", interval()}}))}});
}
Json audit_schema() {
  return obj({{"passed", type("boolean")},
              {"checked", type("integer")},
              {"hypotheses", type("integer")},
              {"failures", array_of(type("string"))}});
}

Json result_schema(Command c) {
  switch (c) {
    case Command::KillerCertify:
    case Command::KillerProbe: {
      Json row = obj({{"step", type("integer")},
                      {"kind", type("string")},
                      {"c1", type("integer")},
                      {"action", type("object")},
                      {"index", type("integer")},
                      {"action_value", exact()},
                      {"action_approx", type("number")},
                      {"verdict", Json{{"type", "string"},
                                       {"enum", {"ZERO", "NEGATIVE", "ABOVE_E", "FORBIDDEN_IN_RANGE"}}}}});
      Json s = obj({{"status", Json{{"type", "string"}, {"enum", {"CERTIFIED", "REFUTED", "INVALID_INPUT"}}}},
                    {"violations", array_of(type("string"))},
                    {"chosen_m", nullable(exact())},
                    {"parameters", type("object")},
                    {"frame", array_of(type("string"))},
                    {"offender", nullable(row)},
                    {"windows", type("array")},
                    {"table", array_of(row)}});
      if (c == Command::KillerProbe) {
        s["properties"]["probe"] = exact();
        s["required"].push_back("probe");
      }
      return s;
    }
    case Command::CoverAnalyze:
      return obj({{"cover", obj({{"domain", type("object")}, {"balls", type("array")}}, {"domain", "balls"})},
                  {"graph", obj({{"d", type("integer")},
                                 {"edge_count", type("integer")},
                                 {"degrees", array_of(type("integer"))},
                                 {"edges", type("array")},
                                 {"colors", type("integer")},
                                 {"coloring", array_of(type("integer"))},
                                 {"families", type("array")}})},
                  {"families_disjoint", type("boolean")},
                  {"color_bound_holds", type("boolean")}});
    case Command::CoverPb:
      return obj({{"cover", obj({{"id", type("string")},
                                 {"balls", type("integer")},
                                 {"max_radius", type("number")},
                                 {"d", type("integer")},
                                 {"families", type("integer")}})},
                  {"partition", obj({{"cutoff", type("string")},
                                     {"support_scale", type("number")},
                                     {"subordinate", type("boolean")},
                                     {"max_sum_error", type("number")},
                                     {"min_value", type("number")}})},
                  {"nu", obj({{"nu_c", type("number")},
                              {"argmax", array_of(type("number"))},
                              {"argmax_index", array_of(type("integer"))},
                              {"x", array_of(type("integer"))},
                              {"y", array_of(type("integer"))},
                              {"grid", type("integer")},
                              {"exact", type("boolean")},
                              {"max_active", type("integer")}})},
                  {"bound_check", obj({{"status", Json{{"type", "string"}, {"enum", {"PASS", "FAIL", "SKIPPED"}}}},
                                       {"reason", type("string")},
                                       {"d", type("integer")},
                                       {"r", type("number")},
                                       {"bound", type("number")},
                                       {"nu_c", type("number")},
                                       {"grid_slack", type("number")},
                                       {"small_energy_asserted", type("boolean")},
                                       {"subordinate", type("boolean")}})}},
                 {});
    case Command::BoundPropagate:
      return obj({{"final", obj({{"quantity", type("string")}, {"interval", interval()}})},
                  {"audit", audit_schema()},
                  {"lemma_facts", array_of(type("integer"))},
                  {"trace", trace_schema()},
                  {"pb", nullable(obj({{"d", type("integer")},
                                       {"r", type("string")},
                                       {"bound", sym()},
                                       {"audit", audit_schema()},
                                       {"trace", trace_schema()}}))}});
  }
  return Json::object();
}

bool has_type(const Json& value, const std::string& t) {
  if (t == "object") return value.is_object();
  if (t == "array") return value.is_array();
  if (t == "string") return value.is_string();
  if (t == "integer") return value.is_number_integer();
  if (t == "number") return value.is_number();
  if (t == "boolean") return value.is_boolean();
  if (t == "null") return value.is_null();
  return false;
}

void validate(const Json& value, const Json& schema, const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const Json& t = schema.at("type");
    const std::vector<std::string> allowed =
        t.is_array() ? t.get<std::vector<std::string>>() : std::vector<std::string>{t.get<std::string>()};
    if (std::none_of(allowed.begin(), allowed.end(), [&](const std::string& a) { return has_type(value, a); })) {
      errors.push_back(path + ": expected " + join(allowed, " or ") + ", got " + value.type_name());
      return;
    }
  }
  if (schema.contains("enum") && std::find(schema.at("enum").begin(), schema.at("enum").end(), value) ==
                                     schema.at("enum").end()) {
    errors.push_back(path + ": value " + value.dump() + " not in enumeration");
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>())) errors.push_back(path + "." + key.get<std::string>() + ": missing");
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema.at("properties").items()) {
        if (value.contains(key)) validate(value.at(key), sub, path + "." + key, errors);
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      validate(value[i], schema.at("items"), path + "[" + std::to_string(i) + "]", errors);
    }
  }
}

}  // namespace

static Json status_enum(Command c) {
  switch (c) {
    case Command::KillerCertify:
    case Command::KillerProbe: return {"CERTIFIED", "REFUTED", "INVALID_INPUT"};
    case Command::CoverAnalyze: return {"OK", "ERROR", "INVALID_INPUT"};
    case Command::CoverPb: return {"PASS", "FAIL", "SKIPPED", "INVALID_INPUT"};
    case Command::BoundPropagate: return {"OK", "AUDIT_FAILED", "INVALID_INPUT"};
  }
  return Json::array();
}

Json report_schema(Command c) {
  Json s = obj({{"command", Json{{"type", "string"}, {"enum", {command_name(c)}}}},
                {"schema_version", type("integer")},
                {"seed", type("integer")},
                {"status", Json{{"type", "string"}, {"enum", status_enum(c)}}},
                {"exit_code", type("integer")},
                {"config", type("object")},
                {"errors", array_of(type("string"))},
                {"result", nullable(result_schema(c))}});
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = command_name(c) + " report";
  return s;
}

std::vector<std::string> validate_report(const Json& report) {
  std::vector<std::string> errors;
  if (!report.is_object() || !report.contains("command") || !report.at("command").is_string()) {
    return {"report: missing command"};
  }
  const auto name = report.at("command").get<std::string>();
  const auto it = std::find_if(command_table().begin(), command_table().end(),
                               [&](const auto& e) { return e.second == name; });
  if (it == command_table().end()) return {"report.command: unknown command '" + name + "'"};
  validate(report, report_schema(it->first), "report", errors);
  return errors;
}

}  // namespace specpb
