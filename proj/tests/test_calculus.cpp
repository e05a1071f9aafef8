#include "specpb/calculus.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace specpb;

namespace {

Rational q(const char* text) { return parse_rational(text); }

SymExpr pi_times(const Rational& x) { return SymExpr::monomial(x, 1); }

Json interval(const Bound& b) { return b.to_json(); }

ManifoldModel scenario_model() {
  ManifoldModel m;
  m.n = 1;
  m.lambda = Rational(-1);
  return m;
}

std::vector<BallSpec> three_balls() {
  return {{"U1", q("0.2"), PiRational(q("0.4"))},
          {"U2", q("0.3"), PiRational(q("0.4"))},
          {"U3", q("0.25"), PiRational(q("0.4"))}};
}

/// Trace with two balls, each carrying one Hamiltonian with a hypothesis
/// c(H_i) <= bound_i, and the declared sum H1+H2.
BoundTrace two_supports(bool disjoint) {
  BoundTrace t;
  t.declare_region("A");
  t.declare_region("B");
  if (disjoint) t.declare_disjoint("A", "B");
  t.declare_hamiltonian({"H1", {"A"}, false, {}, {}, std::nullopt});
  t.declare_hamiltonian({"H2", {"B"}, false, {}, {}, std::nullopt});
  t.declare_hamiltonian({"H1+H2", {"A", "B"}, false, {}, {"H1", "H2"}, std::nullopt});
  t.apply(Rule::Hypothesis, {}, Json{{"quantity", c_of("H1")}, {"interval", interval(Bound::at_most(SymExpr(1)))}});
  t.apply(Rule::Hypothesis, {}, Json{{"quantity", c_of("H2")}, {"interval", interval(Bound::at_most(SymExpr(2)))}});
  return t;
}

const BoundFact* first_with(const BoundTrace& t, Rule rule) {
  for (const auto& f : t.facts()) {
    if (f.rule == rule) return &f;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("symbolic expressions") {
  const SymExpr a = pi_times(q("0.09"));
  CHECK(a.sign() == 1);
  CHECK(std::abs(a.approx() - 0.09 * std::numbers::pi) < 1e-15);
  CHECK((a - a).is_zero());
  const auto root = (a * SymExpr::monomial(Rational(4), 1)).sqrt();
  REQUIRE(root);
  CHECK(*root == pi_times(q("0.6")));
  CHECK_FALSE((a + SymExpr(1)).sqrt());
  const auto inv = a.inverse();
  REQUIRE(inv);
  CHECK(*inv * a == SymExpr(1));
  CHECK(SymExpr::from_json(a.to_json()) == a);
  CHECK_THROWS_AS(SymExpr::monomial(Rational(1), 0, 1).sign(), std::domain_error);
  // 22/7 - pi > 0 and pi^2 - 9.87 < 0
  CHECK((SymExpr(q("22/7")) - pi_times(Rational(1))).sign() == 1);
  CHECK((SymExpr::monomial(Rational(1), 2) - SymExpr(q("9.87"))).sign() == -1);
}

TEST_CASE("triangle on disjoint supports adds the bounds") {
  BoundTrace t = two_supports(true);
  const auto& f = t.apply(Rule::TriangleDisjoint, {1, 2}, Json{{"sum", "H1+H2"}});
  CHECK(f.quantity == c_of("H1+H2"));
  CHECK(f.interval == Bound::at_most(SymExpr(3)));
  CHECK(t.audit().passed);
}

TEST_CASE("triangle on overlapping supports is a schema error") {
  BoundTrace t = two_supports(false);
  CHECK_THROWS_AS(t.apply(Rule::TriangleDisjoint, {1, 2}, Json{{"sum", "H1+H2"}}), SchemaError);
  CHECK(t.facts().size() == 2);
}

TEST_CASE("normalization and continuity") {
  BoundTrace t;
  t.declare_region("A");
  t.declare_hamiltonian({"H", {"A"}, false, {}, {}, std::nullopt});
  t.declare_hamiltonian({"K", {"A"}, false, {}, {}, std::nullopt});
  t.declare_hamiltonian({"H+K", {"A"}, false, {}, {"H", "K"}, std::nullopt});
  const auto& zero = t.apply(Rule::Normalization, {});
  CHECK(zero.quantity == "c(0)");
  CHECK(zero.interval == Bound::exactly(SymExpr(0)));
  const int hk = t.apply(Rule::Hypothesis, {},
                         Json{{"quantity", c_of("H+K")}, {"interval", interval(Bound::exactly(SymExpr(0)))}})
                     .id;
  const int norm = t.apply(Rule::Hypothesis, {},
                           Json{{"quantity", norm_of("K")}, {"interval", interval(Bound::exactly(pi_times(q("0.04"))))}})
                       .id;
  const auto& cont = t.apply(Rule::Continuity, {hk, norm}, Json{{"h", "H"}, {"g", "H+K"}, {"diff", "K"}});
  CHECK(cont.quantity == c_of("H"));
  CHECK(cont.interval == Bound::between(-pi_times(q("0.04")), pi_times(q("0.04"))));
  // the difference must really be K
  CHECK_THROWS_AS(t.apply(Rule::Continuity, {hk, norm}, Json{{"h", "K"}, {"g", "H+K"}, {"diff", "K"}}), SchemaError);
  CHECK(t.audit().passed);
}

TEST_CASE("monotonicity needs a declared order") {
  BoundTrace t;
  t.declare_region("A");
  t.declare_hamiltonian({"0", {}, true, {}, {}, SymExpr(0)});
  t.declare_hamiltonian({"F", {"A"}, false, {}, {}, std::nullopt});
  const int zero = t.apply(Rule::Normalization, {}).id;
  const int order = t.apply(Rule::Hypothesis, {},
                            Json{{"quantity", "F <= 0"}, {"interval", interval(Bound::exactly(SymExpr(1)))}})
                        .id;
  const auto& f = t.apply(Rule::Monotonicity, {order, zero}, Json{{"h", "F"}, {"g", "0"}});
  CHECK(f.interval == Bound::at_most(SymExpr(0)));
  CHECK_THROWS_AS(t.apply(Rule::Monotonicity, {zero, zero}, Json{{"h", "F"}, {"g", "0"}}), SchemaError);
}

TEST_CASE("unknown premises and bad parameters are schema errors") {
  BoundTrace t = two_supports(true);
  CHECK_THROWS(t.apply(Rule::TriangleDisjoint, {1, 7}, Json{{"sum", "H1+H2"}}));
  CHECK_THROWS(t.apply(Rule::TriangleDisjoint, {1}, Json{{"sum", "H1+H2"}}));
  CHECK_THROWS(t.apply(Rule::TriangleDisjoint, {1, 2}, Json{{"sum", "nope"}}));
  CHECK_THROWS_AS(t.apply(Rule::Intersect, {1, 2}), SchemaError);
}

TEST_CASE("rule names round trip") {
  for (Rule r : {Rule::Hypothesis, Rule::NonnegLemma, Rule::TriangleDisjoint, Rule::KillerCertificate, Rule::PbInfimum}) {
    CHECK(rule_from_string(to_string(r)) == r);
  }
  CHECK(to_string(Rule::NonnegLemma) == "nonneg_lemma");
  CHECK_THROWS(rule_from_string("modus_ponens"));
}

TEST_CASE("nonnegativity from a uniform bound") {
  const BoundTrace t = derive_nonneg("U", PiRational(q("0.4")));
  CHECK(t.last().quantity == c_uniform("U"));
  CHECK(t.last().interval == Bound::between(SymExpr(0), SymExpr(q("0.4"))));
  const BoundFact* iterate = first_with(t, Rule::IterateHypothesis);
  REQUIRE(iterate);
  CHECK(iterate->params["m"] == 5);
  CHECK(first_with(t, Rule::NonnegLemma));
  CHECK(t.audit().passed);
}

TEST_CASE("nonnegativity with E = 0") {
  const BoundTrace t = derive_nonneg("U", PiRational(0));
  CHECK(t.last().interval == Bound::between(SymExpr(0), SymExpr(0)));
  CHECK(t.audit().passed);
}

TEST_CASE("iterate count for other delta fractions") {
  // smallest m with m * f * E > 2E is floor(2 / f) + 1
  for (const auto& [frac, m] : std::vector<std::pair<Rational, int>>{{Rational(1, 3), 7}, {Rational(1), 3}, {Rational(3, 4), 3}}) {
    const BoundTrace t = derive_nonneg("U", PiRational(Rational(0), Rational(1, 10)), frac);
    const BoundFact* iterate = first_with(t, Rule::IterateHypothesis);
    REQUIRE(iterate);
    CHECK(iterate->params["m"] == m);
    CHECK(t.audit().passed);
  }
}

TEST_CASE("theorem bound for three balls") {
  for (KillerSource source : {KillerSource::Assumed, KillerSource::Certified}) {
    TheoremBoundOptions opt;
    opt.killers = source;
    const BoundTrace t = derive_theorem_bound(three_balls(), scenario_model(), opt);
    CHECK(t.last().interval == Bound::between(SymExpr(0), pi_times(q("0.09"))));
    const AuditReport audit = t.audit();
    CHECK(audit.passed);
    CHECK(audit.checked == static_cast<int>(t.facts().size()));
    CHECK(first_with(t, Rule::NonnegLemma));
    CHECK(first_with(t, Rule::KillerCertificate));
  }
}

TEST_CASE("theorem bound for a single ball") {
  const BoundTrace t = derive_theorem_bound({{"U1", q("0.3"), PiRational(q("0.4"))}}, scenario_model());
  CHECK(t.last().interval == Bound::between(SymExpr(0), pi_times(q("0.09"))));
  CHECK(t.last().quantity == c_of("H_U1"));
  CHECK(t.audit().passed);
}

TEST_CASE("theorem bound rejects E >= |lambda| / 2 and names the ball") {
  auto balls = three_balls();
  balls[1].E = PiRational(q("0.5"));
  try {
    derive_theorem_bound(balls, scenario_model());
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    REQUIRE(e.problems().size() == 1);
    CHECK(e.problems()[0].find("U2") != std::string::npos);
  }
}

TEST_CASE("theorem bound rejects E below the capacity") {
  auto balls = three_balls();
  balls[0].r = q("0.4");
  CHECK_THROWS_AS(derive_theorem_bound(balls, scenario_model()), PreconditionError);
}

TEST_CASE("serialized traces replay and tampering is detected") {
  const BoundTrace t = derive_theorem_bound(three_balls(), scenario_model());
  const Json j = t.to_json();
  const BoundTrace back = BoundTrace::from_json(Json::parse(j.dump()));
  CHECK(back.audit().passed);
  CHECK(back.to_json().dump() == j.dump());

  Json widened = j;
  widened["facts"].back()["interval"] = Bound::between(SymExpr(0), pi_times(q("0.08"))).to_json();
  CHECK_FALSE(BoundTrace::from_json(widened).audit().passed);

  Json forward = j;
  auto& fact = forward["facts"][5];
  if (!fact["premises"].empty()) {
    fact["premises"][0] = static_cast<int>(forward["facts"].size());
    CHECK_FALSE(BoundTrace::from_json(forward).audit().passed);
  }

  Json renamed = j;
  renamed["facts"][0]["quantity"] = "c(something else)";
  CHECK_FALSE(BoundTrace::from_json(renamed).audit().passed);
}

TEST_CASE("zeta of a capped family vanishes") {
  BoundTrace t;
  t.declare_region("A");
  t.declare_hamiltonian({"F", {"A"}, false, {}, {}, std::nullopt});
  t.declare_hamiltonian({"s*F", {"A"}, false, {}, {}, std::nullopt});
  t.apply(Rule::Hypothesis, {},
          Json{{"quantity", c_of("s*F")}, {"interval", interval(Bound::between(SymExpr(0), pi_times(q("0.09"))))}});
  const auto& z = zeta_of_capped_family(t, "F", pi_times(q("0.09")));
  CHECK(z.quantity == zeta_of("F"));
  CHECK(z.interval == Bound::exactly(SymExpr(0)));

  BoundTrace empty;
  empty.declare_region("A");
  empty.declare_hamiltonian({"F", {"A"}, false, {}, {}, std::nullopt});
  empty.declare_hamiltonian({"s*F", {"A"}, false, {}, {}, std::nullopt});
  CHECK_THROWS(zeta_of_capped_family(empty, "G", pi_times(q("0.09"))));
  // the cap becomes a hypothesis and s*F is declared on demand
  CHECK(zeta_of_capped_family(empty, "F", pi_times(q("0.09"))).interval == Bound::exactly(SymExpr(0)));
  CHECK(empty.has_hamiltonian("s*F"));
}

TEST_CASE("pb lower bound examples") {
  const PbBound one = pb_lower_bound(1, SymExpr::monomial(Rational(1), -1));
  CHECK(one.bound == SymExpr(Rational(1, 2)));
  const PbBound three = pb_lower_bound(3, q("0.2"));
  CHECK(three.bound == SymExpr::monomial(Rational(25, 18), -1));
  CHECK(std::abs(three.bound.approx() - 0.442097064144) < 1e-11);
  CHECK(three.trace.audit().passed);
  CHECK(three.trace.last().quantity.rfind("pb(", 0) == 0);
  CHECK(std::abs(pb_lower_bound_value(3, 0.2) - three.bound.approx()) < 1e-14);
  CHECK_THROWS(pb_lower_bound(0, q("0.2")));
  CHECK_THROWS(pb_lower_bound(2, Rational(0)));
}

TEST_CASE("pb lower bound is monotone in d and r") {
  for (int d = 1; d < 6; ++d) {
    CHECK(pb_lower_bound(d + 1, q("0.3")).bound.approx() < pb_lower_bound(d, q("0.3")).bound.approx());
    CHECK(pb_lower_bound(d, q("0.31")).bound.approx() < pb_lower_bound(d, q("0.3")).bound.approx());
  }
}

TEST_CASE("pb lower bound times pi r^2 2 d^2 is one") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> rd(1, 999);
  for (int d = 1; d <= 6; ++d) {
    for (int k = 0; k < 5; ++k) {
      const Rational r(rd(rng), 1000);
      const PbBound b = pb_lower_bound(d, r);
      CHECK(b.bound * pi_times(r * r) * SymExpr(2 * d * d) == SymExpr(1));
      CHECK(b.trace.audit().passed);
    }
  }
}
