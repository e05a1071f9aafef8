// Interval calculus for spectral invariants and the partial quasi-state.
//
// Hamiltonians are opaque ids carrying support metadata; facts are interval
// bounds on quantities such as c(H), zeta(F), S(F, G) or nu_c.  Every fact
// is produced by a named rule from earlier facts, so a serialized trace can
// be replayed rule by rule (audit()).
#pragma once

#include "specpb/exact.hpp"
#include "specpb/floer.hpp"
#include "specpb/json_io.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace specpb {

/// Finite sum of q * pi^p * t^k with rational q.  The symbol t stands for
/// the single trace-level unknown sqrt(2 pi r^2 nu_c) of the Poisson-bracket
/// chain; everything else is an element of Q[pi, 1/pi].
class SymExpr {
public:
  using Key = std::pair<int, int>;  // (pi power, t power)

  SymExpr() = default;
  SymExpr(const Rational& q);
  SymExpr(const PiRational& x);
  SymExpr(int q) : SymExpr(Rational(q)) {}

  static SymExpr monomial(const Rational& coeff, int pi_power, int t_power = 0);

  const std::map<Key, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool has_symbol() const;

  /// Exact sign; throws std::domain_error when t occurs.
  int sign() const;
  double approx(double t = 0.0) const;

  /// Square root of a single monomial with even powers and a square
  /// coefficient; std::nullopt otherwise.
  std::optional<SymExpr> sqrt() const;
  /// Inverse of a single monomial; std::nullopt otherwise.
  std::optional<SymExpr> inverse() const;

  SymExpr operator-() const;
  SymExpr& operator+=(const SymExpr& o);
  SymExpr& operator-=(const SymExpr& o) { return *this += -o; }
  friend SymExpr operator+(SymExpr a, const SymExpr& b) { return a += b; }
  friend SymExpr operator-(SymExpr a, const SymExpr& b) { return a -= b; }
  friend SymExpr operator*(const SymExpr& a, const SymExpr& b);
  friend bool operator==(const SymExpr&, const SymExpr&) = default;

  std::string to_string() const;
  Json to_json() const;
  static SymExpr from_json(const Json& j);

private:
  void prune();
  std::map<Key, Rational> terms_;
};

/// Closed interval; a missing end is unbounded.
struct Bound {
  std::optional<SymExpr> lo;
  std::optional<SymExpr> hi;

  static Bound exactly(const SymExpr& v) { return {v, v}; }
  static Bound at_most(const SymExpr& v) { return {std::nullopt, v}; }
  static Bound at_least(const SymExpr& v) { return {v, std::nullopt}; }
  static Bound between(const SymExpr& a, const SymExpr& b) { return {a, b}; }

  friend bool operator==(const Bound&, const Bound&) = default;
  std::string to_string() const;
  Json to_json() const;
  static Bound from_json(const Json& j);
};

enum class Rule {
  Hypothesis,
  Normalization,
  EnergyCapacity,
  InverseLowerBound,
  TriangleDisjoint,
  TriangleUniform,
  IterateHypothesis,
  NonnegLemma,
  Instantiate,
  KillerCertificate,
  KillerSupNorm,
  SupNormDisjoint,
  Continuity,
  Monotonicity,
  Intersect,
  ZetaNormalization,
  ZetaMonotonicity,
  ZetaCappedFamily,
  SBound,
  PoissonBracketInequality,
  QuasiStateStep,
  SolveNu,
  PbInfimum,
};

std::string to_string(Rule r);
Rule rule_from_string(const std::string& s);

struct AbstractHamiltonian {
  std::string id;
  /// Ids of the regions (balls or unions of disjoint balls) containing the
  /// support; empty with global = true for unrestricted functions.
  std::set<std::string> support;
  bool global = false;
  std::vector<std::string> roles;
  /// Components when this Hamiltonian is declared as a sum.
  std::vector<std::string> sum_of;
  /// Value when the function is a constant.
  std::optional<SymExpr> constant;
};

struct BoundFact {
  int id = 0;
  std::string quantity;
  Bound interval;
  Rule rule = Rule::Hypothesis;
  std::vector<int> premises;
  Json params = Json::object();
};

/// Raised when premises do not match a rule's schema.
class SchemaError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct AuditReport {
  bool passed = true;
  std::vector<std::string> failures;
  int hypotheses = 0;
  int checked = 0;
};

/// Append-only store of facts with the Hamiltonian and region declarations
/// they refer to.
class BoundTrace {
public:
  /// A region is a ball or a union of balls; `parts` lists the balls of a
  /// union.  Balls of one union must be declared pairwise disjoint.
  void declare_region(const std::string& id, std::vector<std::string> parts = {});
  void declare_disjoint(const std::string& a, const std::string& b);
  void declare_hamiltonian(AbstractHamiltonian h);

  bool has_hamiltonian(const std::string& id) const { return hamiltonians_.count(id) > 0; }
  const AbstractHamiltonian& hamiltonian(const std::string& id) const;
  bool regions_disjoint(const std::string& a, const std::string& b) const;
  /// True when every region of `inner` lies in `outer`.
  bool region_contains(const std::string& outer, const std::string& inner) const;

  /// Applies a rule and appends the resulting fact; throws SchemaError.
  const BoundFact& apply(Rule rule, std::vector<int> premises, Json params = Json::object());

  const std::vector<BoundFact>& facts() const { return facts_; }
  const BoundFact& fact(int id) const;
  const BoundFact& last() const { return facts_.back(); }
  /// Latest fact about `quantity`, if any.
  const BoundFact* find(const std::string& quantity) const;

  AuditReport audit() const;

  Json to_json() const;
  static BoundTrace from_json(const Json& j);

private:
  std::pair<std::string, Bound> evaluate(Rule rule, const std::vector<int>& premises, const Json& params) const;
  std::vector<std::string> atoms(const std::string& id) const;
  std::set<std::string> leaf_regions(const std::string& region) const;

  std::map<std::string, std::vector<std::string>> regions_;
  std::vector<std::pair<std::string, std::string>> disjoint_;
  std::map<std::string, AbstractHamiltonian> hamiltonians_;
  std::vector<std::string> hamiltonian_order_;
  std::vector<BoundFact> facts_;
};

/// Quantity names used by the rules.
std::string c_of(const std::string& h);
std::string c_uniform(const std::string& region);
std::string norm_of(const std::string& h);
std::string energy_of(const std::string& region);
std::string zeta_of(const std::string& h);

/// Adds the nonnegativity argument for Hamiltonians supported in `region`
/// given the fact `uniform_bound` (c <= E on all of them).  The iterate
/// uses the hypothetical c(H) = -delta with delta = delta_fraction * E.
/// Returns the id of the fact c[Ham(region)] in [0, E].
int derive_nonneg(BoundTrace& trace, const std::string& region, int uniform_bound,
                  const Rational& delta_fraction = Rational(1, 2));

/// Standalone trace: hypothesis c <= E on `region`, then nonnegativity.
BoundTrace derive_nonneg(const std::string& region, const PiRational& E,
                         const Rational& delta_fraction = Rational(1, 2));

struct BallSpec {
  std::string id;
  Rational r;
  PiRational E;
};

enum class KillerSource { Assumed, Certified };

struct TheoremBoundOptions {
  KillerSource killers = KillerSource::Assumed;
  Rational eps_fraction{1, 8};  ///< killer width eps = eps_fraction * r_i
  Rational delta_fraction{1, 2};
};

/// Raised with one message per offending ball.
class PreconditionError : public std::invalid_argument {
public:
  explicit PreconditionError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

/// Trace of the disjoint-ball bound 0 <= c(H) <= pi max(r_i)^2 for H
/// supported in the union of the balls.  The last fact is the final interval.
BoundTrace derive_theorem_bound(const std::vector<BallSpec>& balls, const ManifoldModel& model,
                                const TheoremBoundOptions& options = {});

/// zeta(F) = 0 for a family with 0 <= c(sF) <= bound for all s > 0.
const BoundFact& zeta_of_capped_family(BoundTrace& trace, const std::string& family, const SymExpr& bound);

struct PbBound {
  SymExpr bound;  ///< 1 / (2 d^2 pi r^2)
  BoundTrace trace;
};

/// Lower bound on pb for d-regular covers by balls of radius at most r,
/// given r^2 as an element of Q(pi) or Q/pi (r^2 may involve 1/pi).
PbBound pb_lower_bound(int d, const SymExpr& r_squared);
PbBound pb_lower_bound(int d, const Rational& r);
double pb_lower_bound_value(int d, double r);

}  // namespace specpb
