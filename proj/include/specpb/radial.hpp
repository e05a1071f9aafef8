// Radial Hamiltonian profiles F(z) = f(|z|^2 / 2) in the area coordinate
// s = |z|^2 / 2, represented exactly as piecewise-linear functions of s.
#pragma once

#include "specpb/exact.hpp"
#include "specpb/json_io.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace specpb {

struct ProfileNode {
  Rational s;
  PiRational value;

  friend bool operator==(const ProfileNode&, const ProfileNode&) = default;
};

/// Piecewise-linear profile, constant to the left of the first node and to
/// the right of the last node.  Node s-values are exact rationals.
class RadialProfile {
public:
  enum class Support {
    Compact,  ///< last node value must be 0 (vanishes outside the ball)
    Any,
  };

  /// Throws InvalidParameter unless s-values are strictly increasing, the
  /// first is >= 0, and (for Support::Compact) the last value is zero.
  explicit RadialProfile(std::vector<ProfileNode> nodes, Support support = Support::Compact);

  std::span<const ProfileNode> nodes() const { return nodes_; }
  Support support() const { return support_; }

  /// Exact interpolation; s must be >= 0.
  PiRational evaluate(const Rational& s) const;

  /// Slope of the piece left (right) of node i; the outer constant pieces
  /// have slope zero.
  PiRational slope_left(std::size_t i) const;
  PiRational slope_right(std::size_t i) const;

  /// Same profile plus a constant.  The result uses Support::Any unless c = 0.
  RadialProfile shifted(const PiRational& c) const;

  friend bool operator==(const RadialProfile&, const RadialProfile&) = default;

private:
  std::vector<ProfileNode> nodes_;
  Support support_;
};

/// A sphere family of 1-periodic orbits at a corner where f' jumps across
/// 2*pi*l.  concavity = +1 when the slope increases across the corner (the
/// smoothed profile has f'' > 0 there), -1 otherwise.
struct OrbitCircle {
  Rational s_star;
  std::int64_t l = 0;
  int concavity = 0;
  PiRational f_value;

  friend bool operator==(const OrbitCircle&, const OrbitCircle&) = default;
};

/// All admissible windings of one corner: l_min..l_max, nonzero, with
/// 2*pi*l strictly between the adjacent slopes.
struct CornerWindings {
  std::size_t node = 0;
  Rational s_star;
  PiRational f_value;
  PiRational slope_left;
  PiRational slope_right;
  int concavity = 0;
  std::int64_t l_min = 0;
  std::int64_t l_max = -1;

  std::int64_t count() const { return l_max >= l_min ? l_max - l_min + 1 : 0; }
  OrbitCircle circle(std::int64_t l) const { return {s_star, l, concavity, f_value}; }
};

/// Corners with a nonempty winding range, in node order.  A node at s = 0
/// is the origin, not a circle, and never contributes.
std::vector<CornerWindings> corner_windings(const RadialProfile& p);

/// Every (corner, l) circle, sorted by (s_star, l).
std::vector<OrbitCircle> orbit_circles(const RadialProfile& p);

/// Killer K_eps for the ball of radius r: zero outside the shell
/// r - 4 eps <= |z| <= r - eps, equal to -pi r^2 on r - 3 eps <= |z| <= r - 2 eps,
/// linear in s in between.  Requires 0 < eps < r / 4.
RadialProfile make_killer(const Rational& r, const Rational& eps);

/// Profile dominating H + K_eps: m on the inner ball, then the killer shape
/// with plateau value `plateau` (default -pi r^2).  Requires 0 < eps < r/4
/// and m > 0.
RadialProfile make_certification_profile(const Rational& r, const Rational& eps, const PiRational& m);
RadialProfile make_certification_profile(const Rational& r, const Rational& eps, const PiRational& m,
                                         const PiRational& plateau);

/// The four shell radii (r - k eps)^2 / 2 for k = 4, 3, 2, 1.
std::array<Rational, 4> shell_nodes(const Rational& r, const Rational& eps);

/// max |value| over the nodes.
PiRational sup_norm(const RadialProfile& p);

struct KillerCondition {
  int number = 0;
  std::string description;
  bool passed = false;
  std::string detail;
};

struct KillerValidation {
  std::array<KillerCondition, 5> conditions;
  bool all_passed() const;
};

/// Checks the five defining conditions of a killer for (r, eps) one by one.
/// Linearity is checked in the area coordinate s.
KillerValidation validate_killer(const RadialProfile& p, const Rational& r, const Rational& eps);

Json to_json(const RadialProfile& p);
RadialProfile profile_from_json(const Json& j);

}  // namespace specpb
