#include "specpb/radial.hpp"

#include <algorithm>

namespace specpb {

namespace {

void require_shell(const Rational& r, const Rational& eps) {
  if (r <= 0) throw InvalidParameter("radius must be positive");
  if (eps <= 0) throw InvalidParameter("epsilon must be positive");
  if (eps * 4 >= r) throw InvalidParameter("epsilon must be smaller than r/4");
}

bool on_chord(const ProfileNode& a, const ProfileNode& b, const ProfileNode& x) {
  const Rational t = (x.s - a.s) / (b.s - a.s);
  return x.value == a.value + (b.value - a.value) * t;
}

}  // namespace

RadialProfile::RadialProfile(std::vector<ProfileNode> nodes, Support support)
    : nodes_(std::move(nodes)), support_(support) {
  if (nodes_.empty()) throw InvalidParameter("profile needs at least one node");
  if (nodes_.front().s < 0) throw InvalidParameter("profile s-values must be >= 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].s <= nodes_[i - 1].s) throw InvalidParameter("profile s-values must be strictly increasing");
  }
  if (support_ == Support::Compact && !nodes_.back().value.is_zero()) {
    throw InvalidParameter("compactly supported profile must end at value 0");
  }
}

PiRational RadialProfile::evaluate(const Rational& s) const {
  if (s < 0) throw InvalidParameter("evaluate: s must be >= 0");
  if (s <= nodes_.front().s) return nodes_.front().value;
  if (s >= nodes_.back().s) return nodes_.back().value;
  const auto upper = std::upper_bound(nodes_.begin(), nodes_.end(), s,
                                      [](const Rational& v, const ProfileNode& n) { return v < n.s; });
  const ProfileNode& b = *upper;
  const ProfileNode& a = *(upper - 1);
  if (s == a.s) return a.value;
  return a.value + (b.value - a.value) * ((s - a.s) / (b.s - a.s));
}

PiRational RadialProfile::slope_left(std::size_t i) const {
  if (i == 0) return PiRational(0);
  return (nodes_[i].value - nodes_[i - 1].value) / (nodes_[i].s - nodes_[i - 1].s);
}

PiRational RadialProfile::slope_right(std::size_t i) const {
  if (i + 1 >= nodes_.size()) return PiRational(0);
  return (nodes_[i + 1].value - nodes_[i].value) / (nodes_[i + 1].s - nodes_[i].s);
}

RadialProfile RadialProfile::shifted(const PiRational& c) const {
  std::vector<ProfileNode> moved = nodes_;
  for (auto& n : moved) n.value += c;
  return RadialProfile(std::move(moved), c.is_zero() ? support_ : Support::Any);
}

std::vector<CornerWindings> corner_windings(const RadialProfile& p) {
  std::vector<CornerWindings> corners;
  const auto nodes = p.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].s == 0) continue;
    const PiRational left = p.slope_left(i);
    const PiRational right = p.slope_right(i);
    const int jump = (right - left).sign();
    if (jump == 0) continue;
    const PiRational& lo = jump > 0 ? left : right;
    const PiRational& hi = jump > 0 ? right : left;
    // 2 pi l in the open interval (lo, hi)
    const std::int64_t l_min = floor_over_two_pi(lo) + 1;
    const std::int64_t l_max = -floor_over_two_pi(-hi) - 1;

    CornerWindings base;
    base.node = i;
    base.s_star = nodes[i].s;
    base.f_value = nodes[i].value;
    base.slope_left = left;
    base.slope_right = right;
    base.concavity = jump;
    auto push = [&](std::int64_t a, std::int64_t b) {
      if (a > b) return;
      CornerWindings c = base;
      c.l_min = a;
      c.l_max = b;
      corners.push_back(std::move(c));
    };
    push(l_min, std::min<std::int64_t>(l_max, -1));
    push(std::max<std::int64_t>(l_min, 1), l_max);
  }
  return corners;
}

std::vector<OrbitCircle> orbit_circles(const RadialProfile& p) {
  std::vector<OrbitCircle> circles;
  for (const auto& corner : corner_windings(p)) {
    for (std::int64_t l = corner.l_min; l <= corner.l_max; ++l) circles.push_back(corner.circle(l));
  }
  return circles;
}

std::array<Rational, 4> shell_nodes(const Rational& r, const Rational& eps) {
  std::array<Rational, 4> s;
  for (int k = 4; k >= 1; --k) {
    const Rational radius = r - eps * k;
    s[4 - k] = radius * radius / 2;
  }
  return s;
}

RadialProfile make_killer(const Rational& r, const Rational& eps) {
  require_shell(r, eps);
  const auto s = shell_nodes(r, eps);
  const PiRational floor_value = PiRational::pi_times(-r * r);
  return RadialProfile({{s[0], 0}, {s[1], floor_value}, {s[2], floor_value}, {s[3], 0}});
}

RadialProfile make_certification_profile(const Rational& r, const Rational& eps, const PiRational& m) {
  return make_certification_profile(r, eps, m, PiRational::pi_times(-r * r));
}

RadialProfile make_certification_profile(const Rational& r, const Rational& eps, const PiRational& m,
                                         const PiRational& plateau) {
  require_shell(r, eps);
  if (m.sign() <= 0) throw InvalidParameter("m must be positive");
  const auto s = shell_nodes(r, eps);
  return RadialProfile({{s[0], m}, {s[1], plateau}, {s[2], plateau}, {s[3], 0}});
}

PiRational sup_norm(const RadialProfile& p) {
  PiRational best(0);
  for (const auto& n : p.nodes()) best = max(best, abs(n.value));
  return best;
}

bool KillerValidation::all_passed() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const KillerCondition& c) { return c.passed; });
}

KillerValidation validate_killer(const RadialProfile& p, const Rational& r, const Rational& eps) {
  require_shell(r, eps);
  const auto s = shell_nodes(r, eps);
  const auto nodes = p.nodes();
  const PiRational floor_value = PiRational::pi_times(-r * r);
  auto at = [&](const Rational& x) { return ProfileNode{x, p.evaluate(x)}; };
  auto nodes_inside = [&](const Rational& a, const Rational& b) {
    std::vector<ProfileNode> inside;
    for (const auto& n : nodes) {
      if (n.s > a && n.s < b) inside.push_back(n);
    }
    return inside;
  };

  KillerValidation report;

  {
    auto& c = report.conditions[0];
    c.number = 1;
    c.description = "support contained in the shell r-4eps <= |z| <= r-eps";
    c.passed = at(s[0]).value.is_zero() && at(s[3]).value.is_zero() && at(Rational(0)).value.is_zero();
    for (const auto& n : nodes) {
      if ((n.s < s[0] || n.s > s[3]) && !n.value.is_zero()) {
        c.passed = false;
        c.detail = "nonzero value " + n.value.to_string() + " at s = " + format_rational(n.s);
        break;
      }
    }
    if (!c.passed && c.detail.empty()) c.detail = "nonzero value at the shell boundary";
  }
  {
    auto& c = report.conditions[1];
    c.number = 2;
    c.description = "radial";
    c.passed = true;
    c.detail = "profiles are functions of |z| by construction";
  }
  auto linear_piece = [&](KillerCondition& c, const Rational& a, const Rational& b, int direction) {
    const ProfileNode start = at(a);
    const ProfileNode end = at(b);
    const int trend = (end.value - start.value).sign();
    c.passed = trend == direction;
    if (!c.passed) {
      c.detail = "not strictly " + std::string(direction < 0 ? "decreasing" : "increasing");
      return;
    }
    for (const auto& n : nodes_inside(a, b)) {
      if (!on_chord(start, end, n)) {
        c.passed = false;
        c.detail = "corner at s = " + format_rational(n.s) + " breaks linearity";
        return;
      }
    }
  };
  {
    auto& c = report.conditions[2];
    c.number = 3;
    c.description = "decreases linearly on r-4eps <= |z| <= r-3eps";
    linear_piece(c, s[0], s[1], -1);
  }
  {
    auto& c = report.conditions[3];
    c.number = 4;
    c.description = "equals -pi r^2 on r-3eps <= |z| <= r-2eps";
    c.passed = at(s[1]).value == floor_value && at(s[2]).value == floor_value;
    for (const auto& n : nodes_inside(s[1], s[2])) c.passed = c.passed && n.value == floor_value;
    if (!c.passed) c.detail = "plateau differs from " + floor_value.to_string();
  }
  {
    auto& c = report.conditions[4];
    c.number = 5;
    c.description = "increases linearly on r-2eps <= |z| <= r-eps";
    linear_piece(c, s[2], s[3], +1);
  }
  return report;
}

Json to_json(const RadialProfile& p) {
  Json nodes = Json::array();
  for (const auto& n : p.nodes()) {
    nodes.push_back(Json{{"s", pi_rational_json(PiRational(n.s))}, {"value", pi_rational_json(n.value)}});
  }
  return Json{{"nodes", std::move(nodes)}};
}

RadialProfile profile_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.at("nodes").is_array()) {
    throw InvalidParameter("profile JSON needs a \"nodes\" array");
  }
  std::vector<ProfileNode> nodes;
  for (const auto& n : j.at("nodes")) {
    const PiRational s = pi_rational_from_json(n.at("s"));
    if (!s.is_rational()) throw InvalidParameter("profile s-values must be rational");
    nodes.push_back({s.rat(), pi_rational_from_json(n.at("value"))});
  }
  return RadialProfile(std::move(nodes));
}

}  // namespace specpb
