// Capped 1-periodic orbit classes of radial profiles: actions and
// Conley-Zehnder indices, with recapping by sphere classes.
//
// Sphere classes enter only through c1(A), which ranges over N*Z for the
// minimal Chern number N.  On a monotone model omega(A) = lambda * c1(A).
#pragma once

#include "specpb/exact.hpp"
#include "specpb/json_io.hpp"
#include "specpb/radial.hpp"

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace specpb {

enum class ManifoldMode { Monotone, Aspherical };

struct ManifoldModel {
  int n = 1;                  ///< half-dimension
  Rational lambda{0};         ///< monotonicity constant; ignored when aspherical
  std::int64_t chern_gen = 1; ///< minimal Chern number N
  ManifoldMode mode = ManifoldMode::Monotone;

  bool allows_recapping() const { return mode == ManifoldMode::Monotone; }
  /// lambda on monotone models, 0 on aspherical ones.
  Rational effective_lambda() const { return allows_recapping() ? lambda : Rational(0); }
  bool is_capping(std::int64_t c1) const;
  /// Throws InvalidParameter on n < 1, N < 1, or lambda = 0 in monotone mode.
  void validate() const;
};

/// base + lambda_coeff * lambda, kept symbolic in lambda.
struct SymbolicAction {
  PiRational base;
  Rational lambda_coeff{0};

  PiRational value(const ManifoldModel& model) const {
    return base + PiRational(lambda_coeff * model.effective_lambda());
  }
  friend bool operator==(const SymbolicAction&, const SymbolicAction&) = default;
};

struct TrivialOrbit {
  int plateau_id = 0;
  int morse_index = 0;
  friend bool operator==(const TrivialOrbit&, const TrivialOrbit&) = default;
};

/// branch 1 sits at the minimum of the perturbing Morse function on the
/// sphere family, branch 2 at the maximum.
struct CircleOrbit {
  OrbitCircle circle;
  int branch = 1;
  friend bool operator==(const CircleOrbit&, const CircleOrbit&) = default;
};

struct CappedOrbitClass {
  std::variant<TrivialOrbit, CircleOrbit> kind;
  std::int64_t c1 = 0;
  SymbolicAction action;
  std::int64_t index = 0;

  bool is_circle() const { return std::holds_alternative<CircleOrbit>(kind); }
  friend bool operator==(const CappedOrbitClass&, const CappedOrbitClass&) = default;
};

/// f(s*) - 2 pi l s*.
PiRational base_action_circle(const OrbitCircle& c);

/// morse_index - n - 2 c1.
std::int64_t trivial_index(int morse_index, const ManifoldModel& model, std::int64_t c1);

/// Index before recapping, by branch and concavity:
///   branch 1: -2ln - n (f'' > 0), -2ln - n + 1 (f'' < 0)
///   branch 2: -2ln + n - 1 (f'' > 0), -2ln + n (f'' < 0)
std::int64_t circle_base_index(std::int64_t l, int concavity, int branch, int n);

/// circle_base_index - 2 c1.
std::int64_t circle_index(const OrbitCircle& c, int branch, const ManifoldModel& model, std::int64_t c1);

/// Trivially capped orbit at a critical point of a plateau with value
/// `plateau_value`.
CappedOrbitClass make_trivial_class(int plateau_id, const PiRational& plateau_value, int morse_index,
                                    const ManifoldModel& model);
/// Orbit on a sphere family, capped inside the ball.
CappedOrbitClass make_circle_class(const OrbitCircle& c, int branch, const ManifoldModel& model);

/// Glues a sphere class with c1(A) = a_c1: index -= 2 a_c1, action -= lambda a_c1.
CappedOrbitClass recap(const CappedOrbitClass& o, std::int64_t a_c1, const ManifoldModel& model);

/// (branch, c1) pairs with c1 a valid capping that give index exactly n.
std::vector<std::pair<int, std::int64_t>> index_n_solutions(std::int64_t l, int concavity, const ManifoldModel& model);
std::vector<std::pair<int, std::int64_t>> index_n_solutions(const OrbitCircle& c, const ManifoldModel& model);

Json to_json(const CappedOrbitClass& o);

}  // namespace specpb
