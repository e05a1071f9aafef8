#include "specpb/cover.hpp"

#include "specpb/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace specpb {

// ---------------------------------------------------------------------------
// Domain and cover

Domain Domain::torus(double lx, double ly) {
  if (!(lx > 0) || !(ly > 0)) throw InvalidParameter("torus side lengths must be positive");
  return Domain{Kind::Torus, {0.0, 0.0}, {lx, ly}};
}

Domain Domain::rect(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidParameter("rectangle corners must satisfy x0 < x1, y0 < y1");
  return Domain{Kind::Rect, {x0, y0}, {x1, y1}};
}

Eigen::Vector2d Domain::displacement(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  Eigen::Vector2d d = b - a;
  if (kind == Kind::Torus) {
    const Eigen::Vector2d L = extent();
    for (int k = 0; k < 2; ++k) d(k) -= L(k) * std::round(d(k) / L(k));
  }
  return d;
}

Eigen::Vector2d Domain::grid_point(int i, int j, int n) const {
  const Eigen::Vector2d L = extent();
  if (kind == Kind::Torus) return lo + Eigen::Vector2d(i * L.x() / n, j * L.y() / n);
  const double denom = n > 1 ? n - 1 : 1;
  return lo + Eigen::Vector2d(i * L.x() / denom, j * L.y() / denom);
}

double BallCover::max_radius() const {
  double r = 0.0;
  for (const auto& b : balls) r = std::max(r, b.r);
  return r;
}

void BallCover::validate() const {
  std::vector<std::string> errors;
  const double half = 0.5 * std::min(domain.extent().x(), domain.extent().y());
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const auto& b = balls[i];
    const std::string path = "balls[" + std::to_string(i) + "]";
    if (!std::isfinite(b.c.x()) || !std::isfinite(b.c.y())) errors.push_back(path + ".c: must be finite");
    if (!(b.r > 0) || !std::isfinite(b.r)) errors.push_back(path + ".r: must be positive");
    if (domain.kind == Domain::Kind::Torus && b.r >= half) {
      errors.push_back(path + ".r: disk wraps around the torus (r >= min(Lx, Ly)/2)");
    }
  }
  if (balls.empty()) errors.push_back("balls: at least one ball is required");
  if (!errors.empty()) throw FieldErrors(std::move(errors));
}

namespace {

std::optional<double> number_at(const Json& j, const std::string& path, std::vector<std::string>& errors) {
  if (!j.is_number()) {
    errors.push_back(path + ": expected a number");
    return std::nullopt;
  }
  return j.get<double>();
}

std::vector<double> numbers_at(const Json& j, std::size_t count, const std::string& path,
                               std::vector<std::string>& errors) {
  if (!j.is_array() || j.size() != count) {
    errors.push_back(path + ": expected an array of " + std::to_string(count) + " numbers");
    return {};
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = number_at(j[i], path + "[" + std::to_string(i) + "]", errors);
    if (!v) return {};
    out.push_back(*v);
  }
  return out;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const std::string& path,
                    std::vector<std::string>& errors) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      errors.push_back((path.empty() ? "" : path + ".") + key + ": unknown field");
    }
  }
}

}  // namespace

BallCover cover_from_json(const Json& j) {
  std::vector<std::string> errors;
  BallCover cover;
  if (!j.is_object()) throw FieldErrors({"cover: expected an object"});
  reject_unknown(j, {"id", "domain", "balls"}, "", errors);
  if (j.contains("id")) {
    if (j.at("id").is_string()) {
      cover.id = j.at("id").get<std::string>();
    } else {
      errors.push_back("id: expected a string");
    }
  }
  if (!j.contains("domain") || !j.at("domain").is_object() || j.at("domain").size() != 1) {
    errors.push_back("domain: expected {torus: [Lx, Ly]} or {rect: [x0, y0, x1, y1]}");
  } else if (j.at("domain").contains("torus")) {
    const auto v = numbers_at(j.at("domain").at("torus"), 2, "domain.torus", errors);
    if (!v.empty()) {
      if (v[0] > 0 && v[1] > 0) {
        cover.domain = Domain::torus(v[0], v[1]);
      } else {
        errors.push_back("domain.torus: side lengths must be positive");
      }
    }
  } else if (j.at("domain").contains("rect")) {
    const auto v = numbers_at(j.at("domain").at("rect"), 4, "domain.rect", errors);
    if (!v.empty()) {
      if (v[2] > v[0] && v[3] > v[1]) {
        cover.domain = Domain::rect(v[0], v[1], v[2], v[3]);
      } else {
        errors.push_back("domain.rect: need x0 < x1 and y0 < y1");
      }
    }
  } else {
    errors.push_back("domain: unknown domain kind '" + j.at("domain").begin().key() + "'");
  }
  if (!j.contains("balls") || !j.at("balls").is_array()) {
    errors.push_back("balls: expected an array");
  } else {
    const auto& balls = j.at("balls");
    for (std::size_t i = 0; i < balls.size(); ++i) {
      const std::string path = "balls[" + std::to_string(i) + "]";
      const auto& b = balls[i];
      if (!b.is_object()) {
        errors.push_back(path + ": expected an object");
        continue;
      }
      reject_unknown(b, {"id", "c", "r"}, path, errors);
      Ball ball;
      ball.id = b.contains("id") && b.at("id").is_string() ? b.at("id").get<std::string>() : "b" + std::to_string(i);
      const auto c = b.contains("c") ? numbers_at(b.at("c"), 2, path + ".c", errors) : std::vector<double>{};
      if (!b.contains("c")) errors.push_back(path + ".c: missing");
      if (!c.empty()) ball.c = {c[0], c[1]};
      if (!b.contains("r")) {
        errors.push_back(path + ".r: missing");
      } else if (const auto r = number_at(b.at("r"), path + ".r", errors)) {
        ball.r = *r;
        if (!(ball.r > 0)) errors.push_back(path + ".r: must be positive");
      }
      cover.balls.push_back(std::move(ball));
    }
  }
  if (!errors.empty()) throw FieldErrors(std::move(errors));
  cover.validate();
  return cover;
}

Json to_json(const BallCover& cover) {
  Json domain = cover.domain.kind == Domain::Kind::Torus
                    ? Json{{"torus", {cover.domain.extent().x(), cover.domain.extent().y()}}}
                    : Json{{"rect", {cover.domain.lo.x(), cover.domain.lo.y(), cover.domain.hi.x(),
                                     cover.domain.hi.y()}}};
  Json balls = Json::array();
  for (const auto& b : cover.balls) {
    balls.push_back(Json{{"id", b.id}, {"c", {b.c.x(), b.c.y()}}, {"r", b.r}});
  }
  Json j;
  if (!cover.id.empty()) j["id"] = cover.id;
  j["domain"] = std::move(domain);
  j["balls"] = std::move(balls);
  return j;
}

BallCover torus_grid_cover(int k, double lx, double ly, double overlap) {
  if (k < 1) throw InvalidParameter("grid size must be >= 1");
  BallCover cover;
  cover.id = "torus-grid-" + std::to_string(k) + "x" + std::to_string(k);
  cover.domain = Domain::torus(lx, ly);
  const double sx = lx / k;
  const double sy = ly / k;
  const double r = (1.0 + overlap) * 0.5 * std::hypot(sx, sy);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      cover.balls.push_back(
          {"b" + std::to_string(i) + "_" + std::to_string(j), {(i + 0.5) * sx, (j + 0.5) * sy}, r});
    }
  }
  cover.validate();
  return cover;
}

// ---------------------------------------------------------------------------
// Graph and coloring

std::size_t IntersectionGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adjacency) twice += a.size();
  return twice / 2;
}

IntersectionGraph intersection_graph(const BallCover& cover) {
  const std::size_t n = cover.size();
  IntersectionGraph g;
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = cover.balls[i];
      const auto& b = cover.balls[j];
      if (cover.domain.distance(a.c, b.c) <= a.r + b.r) {
        g.adjacency[i].push_back(static_cast<int>(j));
        g.adjacency[j].push_back(static_cast<int>(i));
      }
    }
  }
  for (const auto& a : g.adjacency) g.max_degree = std::max(g.max_degree, static_cast<int>(a.size()));
  return g;
}

int d_regularity(const BallCover& cover) { return intersection_graph(cover).max_degree; }

Coloring color_disjoint_families(const BallCover& cover, const IntersectionGraph& graph) {
  const std::size_t n = cover.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return graph.adjacency[a].size() > graph.adjacency[b].size(); });
  Coloring c;
  c.color.assign(n, -1);
  for (int v : order) {
    std::vector<bool> used(graph.adjacency[v].size() + 1, false);
    for (int w : graph.adjacency[v]) {
      if (c.color[w] >= 0 && c.color[w] < static_cast<int>(used.size())) used[c.color[w]] = true;
    }
    c.color[v] = static_cast<int>(std::find(used.begin(), used.end(), false) - used.begin());
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (c.color[v] >= static_cast<int>(c.families.size())) c.families.resize(c.color[v] + 1);
    c.families[c.color[v]].push_back(static_cast<int>(v));
  }
  return c;
}

Coloring color_disjoint_families(const BallCover& cover) {
  return color_disjoint_families(cover, intersection_graph(cover));
}

bool families_disjoint(const BallCover& cover, const Coloring& coloring) {
  for (const auto& family : coloring.families) {
    for (std::size_t a = 0; a < family.size(); ++a) {
      for (std::size_t b = a + 1; b < family.size(); ++b) {
        const auto& x = cover.balls[family[a]];
        const auto& y = cover.balls[family[b]];
        if (cover.domain.distance(x.c, y.c) <= x.r + y.r) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Partition of unity

std::string to_string(Cutoff c) { return c == Cutoff::Polynomial ? "polynomial" : "exponential"; }

Cutoff cutoff_from_string(const std::string& s) {
  if (s == "polynomial") return Cutoff::Polynomial;
  if (s == "exponential") return Cutoff::Exponential;
  throw InvalidParameter("cutoff must be 'polynomial' or 'exponential'");
}

PartitionOfUnity::PartitionOfUnity(BallCover cover, Cutoff cutoff, double support_scale)
    : cover_(std::move(cover)), cutoff_(cutoff), scale_(support_scale) {
  cover_.validate();
  if (!(scale_ > 0) || !std::isfinite(scale_)) throw InvalidParameter("support scale must be positive");
}

bool PartitionOfUnity::bump(int i, const Eigen::Vector2d& z, double& phi, Eigen::Vector2d& grad) const {
  const Ball& b = cover_.balls[i];
  const double R = scale_ * b.r;
  const Eigen::Vector2d d = cover_.domain.displacement(b.c, z);
  const double q = d.squaredNorm() / (R * R);
  if (q >= 1.0) return false;
  const double u = 1.0 - q;
  const Eigen::Vector2d dq = 2.0 * d / (R * R);
  if (cutoff_ == Cutoff::Polynomial) {
    phi = u * u * u;
    grad = -3.0 * u * u * dq;
  } else {
    phi = std::exp(-1.0 / u);
    grad = -phi / (u * u) * dq;
  }
  return phi > 0.0;
}

PartitionSample PartitionOfUnity::sample(const Eigen::Vector2d& z, const std::vector<int>& candidates) const {
  std::vector<int> active;
  std::vector<double> phis;
  std::vector<Eigen::Vector2d> grads;
  double sum = 0.0;
  Eigen::Vector2d grad_sum = Eigen::Vector2d::Zero();
  for (int i : candidates) {
    double phi = 0.0;
    Eigen::Vector2d g;
    if (!bump(i, z, phi, g)) continue;
    active.push_back(i);
    phis.push_back(phi);
    grads.push_back(g);
    sum += phi;
    grad_sum += g;
  }
  PartitionSample s;
  const auto k = static_cast<Eigen::Index>(active.size());
  s.active = std::move(active);
  s.f.resize(k);
  s.fx.resize(k);
  s.fy.resize(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    s.f(a) = phis[a] / sum;
    const Eigen::Vector2d g = (grads[a] * sum - phis[a] * grad_sum) / (sum * sum);
    s.fx(a) = g.x();
    s.fy(a) = g.y();
  }
  return s;
}

PartitionSample PartitionOfUnity::sample(const Eigen::Vector2d& z) const {
  std::vector<int> all(cover_.size());
  std::iota(all.begin(), all.end(), 0);
  return sample(z, all);
}

Eigen::VectorXd PartitionOfUnity::values(const Eigen::Vector2d& z) const {
  const auto s = sample(z);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  for (std::size_t a = 0; a < s.active.size(); ++a) v(s.active[a]) = s.f(static_cast<Eigen::Index>(a));
  return v;
}

Eigen::MatrixXd PartitionOfUnity::bracket_matrix(const PartitionSample& s) {
  return s.fx * s.fy.transpose() - s.fy * s.fx.transpose();
}

Eigen::MatrixXd PartitionOfUnity::bracket_matrix(const Eigen::Vector2d& z) const {
  const auto s = sample(z);
  const Eigen::MatrixXd local = bracket_matrix(s);
  const auto L = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t a = 0; a < s.active.size(); ++a) {
    for (std::size_t b = 0; b < s.active.size(); ++b) B(s.active[a], s.active[b]) = local(a, b);
  }
  return B;
}

void PartitionOfUnity::check_coverage(int grid) const {
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Eigen::Vector2d z = cover_.domain.grid_point(i, j, grid);
      bool covered = false;
      for (int b = 0; b < static_cast<int>(size()) && !covered; ++b) {
        double phi = 0.0;
        Eigen::Vector2d g;
        covered = bump(b, z, phi, g);
      }
      if (!covered) {
        throw NotACover("grid point (" + std::to_string(z.x()) + ", " + std::to_string(z.y()) +
                            ") lies in no ball",
                        z);
      }
    }
  }
}

PartitionCheck check_partition(const PartitionOfUnity& pou, int grid) {
  PartitionCheck out;
  out.min_value = 1.0;
  const auto& cover = pou.cover();
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Eigen::Vector2d z = cover.domain.grid_point(i, j, grid);
      const auto s = pou.sample(z);
      if (s.active.empty()) throw NotACover("grid point lies in no ball", z);
      out.max_sum_error = std::max(out.max_sum_error, std::abs(s.f.sum() - 1.0));
      out.min_value = std::min(out.min_value, s.f.minCoeff());
      for (std::size_t a = 0; a < s.active.size(); ++a) {
        const Ball& b = cover.balls[s.active[a]];
        if (cover.domain.distance(b.c, z) > b.r && out.subordinate) {
          out.subordinate = false;
          out.subordination_witness = z;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// nu_c

namespace {

struct BlockBest {
  double value = -1.0;
  long index = -1;
  InfOneResult<double> witness;
  std::vector<int> active;
  bool exact = true;
  int max_active = 0;
  long gap = -1;  ///< first uncovered grid index in the block
};

// Inclusive grid index ranges [first, last] touched by a disk along one axis,
// widened by one cell so rounding never drops a candidate.
std::pair<long, long> index_range(double centre, double radius, double origin, double step) {
  return {static_cast<long>(std::floor((centre - radius - origin) / step)) - 1,
          static_cast<long>(std::ceil((centre + radius - origin) / step)) + 1};
}

}  // namespace

NuReport nu_c(const PartitionOfUnity& pou, const NuOptions& options) {
  const int n = options.grid;
  if (n < 1) throw InvalidParameter("grid must be >= 1");
  const auto& cover = pou.cover();
  const auto& dom = cover.domain;
  const bool torus = dom.kind == Domain::Kind::Torus;
  const Eigen::Vector2d step = torus ? Eigen::Vector2d(dom.extent() / n)
                                     : Eigen::Vector2d(dom.extent() / (n > 1 ? n - 1 : 1));
  const int L = static_cast<int>(pou.size());

  // Per ball: the grid indices along each axis its support may touch.
  auto axis_indices = [&](double centre, double radius, double origin, double h) {
    auto [first, last] = index_range(centre, radius, origin, h);
    std::vector<int> idx;
    if (torus) {
      if (last - first + 1 >= n) {
        first = 0;
        last = n - 1;
      }
      for (long k = first; k <= last; ++k) idx.push_back(static_cast<int>(((k % n) + n) % n));
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    } else {
      for (long k = std::max(0L, first); k <= std::min<long>(n - 1, last); ++k) idx.push_back(static_cast<int>(k));
    }
    return idx;
  };
  std::vector<std::vector<int>> rows_of(L), cols_of(L);
  std::vector<std::vector<int>> balls_in_row(n);
  for (int b = 0; b < L; ++b) {
    const Ball& ball = cover.balls[b];
    const double R = pou.support_scale() * ball.r;
    rows_of[b] = axis_indices(ball.c.x(), R, dom.lo.x(), step.x());
    cols_of[b] = axis_indices(ball.c.y(), R, dom.lo.y(), step.y());
    for (int i : rows_of[b]) balls_in_row[i].push_back(b);
  }

  NuReport report;
  report.grid = n;
  if (options.keep_field) report.field.assign(static_cast<std::size_t>(n) * n, 0.0);

  unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  std::vector<BlockBest> blocks(threads);

  auto work = [&](unsigned t) {
    BlockBest& best = blocks[t];
    const int row_begin = static_cast<int>(static_cast<long>(n) * t / threads);
    const int row_end = static_cast<int>(static_cast<long>(n) * (t + 1) / threads);
    std::vector<std::vector<int>> candidates(n);
    for (int i = row_begin; i < row_end; ++i) {
      for (auto& c : candidates) c.clear();
      for (int b : balls_in_row[i]) {
        for (int j : cols_of[b]) candidates[j].push_back(b);
      }
      for (int j = 0; j < n; ++j) {
        const long index = static_cast<long>(i) * n + j;
        const Eigen::Vector2d z = dom.grid_point(i, j, n);
        const PartitionSample s = pou.sample(z, candidates[j]);
        const int k = static_cast<int>(s.active.size());
        best.max_active = std::max(best.max_active, k);
        if (k == 0) {
          if (best.gap < 0) best.gap = index;
          continue;
        }
        InfOneOptions o = options.inf_one;
        o.seed = options.inf_one.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1));
        auto result = norm_inf_one(PartitionOfUnity::bracket_matrix(s), o);
        best.exact = best.exact && result.exact;
        if (options.keep_field) report.field[index] = result.value;
        if (result.value > best.value) {
          best.value = result.value;
          best.index = index;
          best.witness = std::move(result);
          best.active = s.active;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();

  // blocks cover ascending row ranges, so the first gap found is the row-major first
  for (const auto& b : blocks) {
    if (b.gap >= 0) {
      const int gi = static_cast<int>(b.gap / n), gj = static_cast<int>(b.gap % n);
      throw NotACover("grid point (" + std::to_string(gi) + ", " + std::to_string(gj) + ") lies in no disk",
                      dom.grid_point(gi, gj, n));
    }
  }
  const BlockBest* winner = nullptr;
  report.exact = true;
  for (const auto& b : blocks) {
    report.exact = report.exact && b.exact;
    report.max_active = std::max(report.max_active, b.max_active);
    if (b.index >= 0 && (!winner || b.value > winner->value)) winner = &b;
  }
  report.x = Eigen::VectorXi::Ones(L);
  report.y = Eigen::VectorXi::Ones(L);
  if (winner) {
    report.nu_c = winner->value;
    report.argmax_i = static_cast<int>(winner->index / n);
    report.argmax_j = static_cast<int>(winner->index % n);
    report.argmax = dom.grid_point(report.argmax_i, report.argmax_j, n);
    for (std::size_t a = 0; a < winner->active.size(); ++a) {
      report.x(winner->active[a]) = winner->witness.x(static_cast<Eigen::Index>(a));
      report.y(winner->active[a]) = winner->witness.y(static_cast<Eigen::Index>(a));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Lower-bound check

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skipped: return "SKIPPED";
  }
  return "?";
}

LowerBoundReport check_lower_bound(const PartitionOfUnity& pou, const NuReport& nu, int d,
                                   bool small_energy_asserted, double grid_slack) {
  LowerBoundReport rep;
  rep.d = d;
  rep.r = pou.cover().max_radius();
  rep.nu_c = nu.nu_c;
  rep.grid_slack = grid_slack;
  rep.small_energy_asserted = small_energy_asserted;
  rep.subordinate = pou.subordinate();
  if (d < 1) {
    rep.reason = "cover has pairwise disjoint closures (d = 0); the bound needs d >= 1";
    return rep;
  }
  rep.bound = pb_lower_bound_value(d, rep.r);
  if (!rep.subordinate) {
    rep.reason = "partition is not subordinate to the cover (support scale " + std::to_string(pou.support_scale()) +
                 " > 1); the bound does not apply";
    return rep;
  }
  rep.status = nu.nu_c >= rep.bound * (1.0 - grid_slack) ? CheckStatus::Pass : CheckStatus::Fail;
  rep.reason = rep.status == CheckStatus::Pass ? "nu_c >= bound * (1 - grid_slack)"
                                               : "nu_c < bound * (1 - grid_slack)";
  if (!small_energy_asserted) rep.reason += "; E(U_i) < |lambda|/2 was not asserted";
  return rep;
}

double loglog_slope(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size() || radii.size() < 2) {
    throw InvalidParameter("loglog_slope needs at least two matching samples");
  }
  double mx = 0, my = 0;
  const double n = static_cast<double>(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0) || !(values[i] > 0)) throw InvalidParameter("loglog_slope needs positive samples");
    mx += std::log(radii[i]) / n;
    my += std::log(values[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double dx = std::log(radii[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw InvalidParameter("loglog_slope needs distinct radii");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// JSON

Json to_json(const IntersectionGraph& g, const Coloring& c) {
  Json edges = Json::array();
  for (std::size_t i = 0; i < g.adjacency.size(); ++i) {
    for (int j : g.adjacency[i]) {
      if (static_cast<int>(i) < j) edges.push_back(Json::array({i, j}));
    }
  }
  Json degrees = Json::array();
  for (const auto& a : g.adjacency) degrees.push_back(a.size());
  return Json{{"d", g.max_degree},
              {"edge_count", g.edge_count()},
              {"degrees", std::move(degrees)},
              {"edges", std::move(edges)},
              {"colors", c.families.size()},
              {"coloring", c.color},
              {"families", c.families}};
}

Json to_json(const NuReport& r) {
  std::vector<int> x(r.x.data(), r.x.data() + r.x.size());
  std::vector<int> y(r.y.data(), r.y.data() + r.y.size());
  return Json{{"nu_c", round12(r.nu_c)},
              {"argmax", {round12(r.argmax.x()), round12(r.argmax.y())}},
              {"argmax_index", {r.argmax_i, r.argmax_j}},
              {"x", x},
              {"y", y},
              {"grid", r.grid},
              {"exact", r.exact},
              {"max_active", r.max_active}};
}

Json to_json(const LowerBoundReport& r) {
  return Json{{"status", to_string(r.status)},
              {"reason", r.reason},
              {"d", r.d},
              {"r", round12(r.r)},
              {"bound", round12(r.bound)},
              {"nu_c", round12(r.nu_c)},
              {"grid_slack", round12(r.grid_slack)},
              {"small_energy_asserted", r.small_energy_asserted},
              {"subordinate", r.subordinate}};
}

}  // namespace specpb
