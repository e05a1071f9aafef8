#include "specpb/calculus.hpp"

#include "specpb/certifier.hpp"
#include "specpb/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace specpb {

// ---------------------------------------------------------------------------
// SymExpr

SymExpr::SymExpr(const Rational& q) {
  if (q != 0) terms_[{0, 0}] = q;
}

SymExpr::SymExpr(const PiRational& x) {
  if (x.rat() != 0) terms_[{0, 0}] = x.rat();
  if (x.pi() != 0) terms_[{1, 0}] = x.pi();
}

SymExpr SymExpr::monomial(const Rational& coeff, int pi_power, int t_power) {
  SymExpr e;
  if (coeff != 0) e.terms_[{pi_power, t_power}] = coeff;
  return e;
}

bool SymExpr::has_symbol() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.first.second != 0; });
}

int SymExpr::sign() const {
  if (has_symbol()) throw std::domain_error("sign of an expression in t is undetermined");
  std::map<int, Rational> poly;
  for (const auto& [key, q] : terms_) poly[key.first] += q;
  return sign_of_pi_polynomial(poly);
}

double SymExpr::approx(double t) const {
  double sum = 0.0;
  for (const auto& [key, q] : terms_) {
    sum += to_double(q) * std::pow(std::numbers::pi, key.first) * std::pow(t, key.second);
  }
  return sum;
}

std::optional<SymExpr> SymExpr::sqrt() const {
  if (terms_.empty()) return SymExpr();
  if (terms_.size() != 1) return std::nullopt;
  const auto& [key, q] = *terms_.begin();
  if (key.first % 2 != 0 || key.second % 2 != 0 || q < 0) return std::nullopt;
  const Integer num = boost::multiprecision::numerator(q);
  const Integer den = boost::multiprecision::denominator(q);
  const Integer sn = boost::multiprecision::sqrt(num);
  const Integer sd = boost::multiprecision::sqrt(den);
  if (sn * sn != num || sd * sd != den) return std::nullopt;
  return monomial(Rational(sn) / Rational(sd), key.first / 2, key.second / 2);
}

std::optional<SymExpr> SymExpr::inverse() const {
  if (terms_.size() != 1) return std::nullopt;
  const auto& [key, q] = *terms_.begin();
  return monomial(Rational(1) / q, -key.first, -key.second);
}

SymExpr SymExpr::operator-() const {
  SymExpr e = *this;
  for (auto& [_, q] : e.terms_) q = -q;
  return e;
}

SymExpr& SymExpr::operator+=(const SymExpr& o) {
  for (const auto& [key, q] : o.terms_) terms_[key] += q;
  prune();
  return *this;
}

SymExpr operator*(const SymExpr& a, const SymExpr& b) {
  SymExpr out;
  for (const auto& [ka, qa] : a.terms_) {
    for (const auto& [kb, qb] : b.terms_) {
      out.terms_[{ka.first + kb.first, ka.second + kb.second}] += qa * qb;
    }
  }
  out.prune();
  return out;
}

void SymExpr::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it = it->second == 0 ? terms_.erase(it) : std::next(it);
  }
}

std::string SymExpr::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, q] : terms_) {
    Rational c = q;
    if (!first) {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    first = false;
    const bool bare = key != SymExpr::Key{0, 0};
    if (c == 1 && bare) {
    } else if (c == -1 && bare) {
      os << "-";
    } else {
      const Integer den = boost::multiprecision::denominator(c);
      os << boost::multiprecision::numerator(c).str();
      if (den != 1) os << "/" << den.str();
      if (bare) os << "*";
    }
    std::string sep;
    if (key.first != 0) {
      os << "pi";
      if (key.first != 1) os << "^" << key.first;
      sep = "*";
    }
    if (key.second != 0) {
      os << sep << "t";
      if (key.second != 1) os << "^" << key.second;
    }
  }
  return os.str();
}

Json SymExpr::to_json() const {
  Json terms = Json::array();
  for (const auto& [key, q] : terms_) terms.push_back(Json::array({format_rational(q), key.first, key.second}));
  Json j{{"terms", std::move(terms)}, {"text", to_string()}};
  j["approx"] = has_symbol() ? Json(nullptr) : Json(round12(approx()));
  return j;
}

SymExpr SymExpr::from_json(const Json& j) {
  SymExpr e;
  for (const auto& term : j.at("terms")) {
    e.terms_[{term.at(1).get<int>(), term.at(2).get<int>()}] += parse_rational(term.at(0).get<std::string>());
  }
  e.prune();
  return e;
}

// ---------------------------------------------------------------------------
// Bound

std::string Bound::to_string() const {
  return std::string(lo ? "[" + lo->to_string() : "(-inf") + ", " + (hi ? hi->to_string() + "]" : "+inf)");
}

Json Bound::to_json() const {
  return Json{{"lo", lo ? lo->to_json() : Json(nullptr)}, {"hi", hi ? hi->to_json() : Json(nullptr)},
              {"text", to_string()}};
}

Bound Bound::from_json(const Json& j) {
  Bound b;
  if (!j.at("lo").is_null()) b.lo = SymExpr::from_json(j.at("lo"));
  if (!j.at("hi").is_null()) b.hi = SymExpr::from_json(j.at("hi"));
  return b;
}

// ---------------------------------------------------------------------------
// Rules

namespace {

const std::vector<std::pair<Rule, std::string>>& rule_names() {
  static const std::vector<std::pair<Rule, std::string>> names = {
      {Rule::Hypothesis, "hypothesis"},
      {Rule::Normalization, "normalization"},
      {Rule::EnergyCapacity, "energy_capacity"},
      {Rule::InverseLowerBound, "inverse_lower_bound"},
      {Rule::TriangleDisjoint, "triangle_disjoint"},
      {Rule::TriangleUniform, "triangle_uniform"},
      {Rule::IterateHypothesis, "iterate_hypothesis"},
      {Rule::NonnegLemma, "nonneg_lemma"},
      {Rule::Instantiate, "instantiate"},
      {Rule::KillerCertificate, "killer_certificate"},
      {Rule::KillerSupNorm, "killer_sup_norm"},
      {Rule::SupNormDisjoint, "sup_norm_disjoint"},
      {Rule::Continuity, "continuity"},
      {Rule::Monotonicity, "monotonicity"},
      {Rule::Intersect, "intersect"},
      {Rule::ZetaNormalization, "zeta_normalization"},
      {Rule::ZetaMonotonicity, "zeta_monotonicity"},
      {Rule::ZetaCappedFamily, "zeta_capped_family"},
      {Rule::SBound, "s_bound"},
      {Rule::PoissonBracketInequality, "poisson_bracket_inequality"},
      {Rule::QuasiStateStep, "quasi_state_step"},
      {Rule::SolveNu, "solve_nu"},
      {Rule::PbInfimum, "pb_infimum"},
  };
  return names;
}

std::string param_string(const Json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_string()) {
    throw SchemaError(std::string("missing string parameter '") + key + "'");
  }
  return params.at(key).get<std::string>();
}

const SymExpr& upper(const BoundFact& f) {
  if (!f.interval.hi) throw SchemaError("fact " + std::to_string(f.id) + " (" + f.quantity + ") has no upper bound");
  return *f.interval.hi;
}

const SymExpr& lower(const BoundFact& f) {
  if (!f.interval.lo) throw SchemaError("fact " + std::to_string(f.id) + " (" + f.quantity + ") has no lower bound");
  return *f.interval.lo;
}

void expect_quantity(const BoundFact& f, const std::string& q) {
  if (f.quantity != q) throw SchemaError("expected a fact about " + q + ", got " + f.quantity);
}

void expect_count(const std::vector<int>& premises, std::size_t n, Rule rule) {
  if (premises.size() != n) {
    throw SchemaError(to_string(rule) + " takes " + std::to_string(n) + " premises, got " +
                      std::to_string(premises.size()));
  }
}

int cmp(const SymExpr& a, const SymExpr& b) { return (a - b).sign(); }

std::string order_of(const std::string& h, const std::string& g) { return h + " <= " + g; }

ManifoldModel model_from_params(const Json& p) {
  ManifoldModel m;
  m.n = p.at("n").get<int>();
  m.lambda = parse_rational(p.at("lambda").get<std::string>());
  m.chern_gen = p.at("N").get<std::int64_t>();
  m.mode = p.at("mode").get<std::string>() == "aspherical" ? ManifoldMode::Aspherical : ManifoldMode::Monotone;
  return m;
}

Json model_params(const ManifoldModel& m) {
  return Json{{"n", m.n},
              {"lambda", format_rational(m.lambda)},
              {"N", m.chern_gen},
              {"mode", m.mode == ManifoldMode::Aspherical ? "aspherical" : "monotone"}};
}

}  // namespace

std::string to_string(Rule r) {
  for (const auto& [rule, name] : rule_names()) {
    if (rule == r) return name;
  }
  return "?";
}

Rule rule_from_string(const std::string& s) {
  for (const auto& [rule, name] : rule_names()) {
    if (name == s) return rule;
  }
  throw SchemaError("unknown rule '" + s + "'");
}

std::string c_of(const std::string& h) { return "c(" + h + ")"; }
std::string c_uniform(const std::string& region) { return "c[Ham(" + region + ")]"; }
std::string norm_of(const std::string& h) { return "||" + h + "||"; }
std::string energy_of(const std::string& region) { return "E(" + region + ")"; }
std::string zeta_of(const std::string& h) { return "zeta(" + h + ")"; }

PreconditionError::PreconditionError(std::vector<std::string> problems)
    : std::invalid_argument([&] {
        std::string msg = "precondition violations:";
        for (const auto& p : problems) msg += " [" + p + "]";
        return msg;
      }()),
      problems_(std::move(problems)) {}

// ---------------------------------------------------------------------------
// BoundTrace

void BoundTrace::declare_region(const std::string& id, std::vector<std::string> parts) {
  for (const auto& p : parts) {
    if (!regions_.count(p)) throw SchemaError("unknown region '" + p + "'");
  }
  regions_[id] = std::move(parts);
}

void BoundTrace::declare_disjoint(const std::string& a, const std::string& b) {
  if (!regions_.count(a) || !regions_.count(b)) throw SchemaError("unknown region in disjointness declaration");
  if (a == b) throw SchemaError("a region is not disjoint from itself");
  disjoint_.emplace_back(a, b);
}

void BoundTrace::declare_hamiltonian(AbstractHamiltonian h) {
  for (const auto& r : h.support) {
    if (!regions_.count(r)) throw SchemaError("Hamiltonian " + h.id + " references unknown region '" + r + "'");
  }
  for (const auto& c : h.sum_of) {
    if (!hamiltonians_.count(c)) throw SchemaError("Hamiltonian " + h.id + " sums unknown '" + c + "'");
  }
  if (hamiltonians_.count(h.id)) throw SchemaError("Hamiltonian " + h.id + " declared twice");
  hamiltonian_order_.push_back(h.id);
  hamiltonians_.emplace(h.id, std::move(h));
}

const AbstractHamiltonian& BoundTrace::hamiltonian(const std::string& id) const {
  const auto it = hamiltonians_.find(id);
  if (it == hamiltonians_.end()) throw SchemaError("unknown Hamiltonian '" + id + "'");
  return it->second;
}

std::set<std::string> BoundTrace::leaf_regions(const std::string& region) const {
  const auto it = regions_.find(region);
  if (it == regions_.end()) throw SchemaError("unknown region '" + region + "'");
  if (it->second.empty()) return {region};
  std::set<std::string> leaves;
  for (const auto& p : it->second) {
    const auto sub = leaf_regions(p);
    leaves.insert(sub.begin(), sub.end());
  }
  return leaves;
}

bool BoundTrace::regions_disjoint(const std::string& a, const std::string& b) const {
  for (const auto& x : leaf_regions(a)) {
    for (const auto& y : leaf_regions(b)) {
      const bool declared = std::any_of(disjoint_.begin(), disjoint_.end(), [&](const auto& d) {
        return (d.first == x && d.second == y) || (d.first == y && d.second == x);
      });
      if (!declared) return false;
    }
  }
  return true;
}

bool BoundTrace::region_contains(const std::string& outer, const std::string& inner) const {
  const auto big = leaf_regions(outer);
  for (const auto& leaf : leaf_regions(inner)) {
    if (!big.count(leaf)) return false;
  }
  return true;
}

std::vector<std::string> BoundTrace::atoms(const std::string& id) const {
  const auto& h = hamiltonian(id);
  if (h.sum_of.empty()) return {id};
  std::vector<std::string> out;
  for (const auto& c : h.sum_of) {
    const auto sub = atoms(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const BoundFact& BoundTrace::fact(int id) const {
  if (id < 1 || id > static_cast<int>(facts_.size())) throw SchemaError("unknown fact id " + std::to_string(id));
  return facts_[id - 1];
}

const BoundFact* BoundTrace::find(const std::string& quantity) const {
  for (auto it = facts_.rbegin(); it != facts_.rend(); ++it) {
    if (it->quantity == quantity) return &*it;
  }
  return nullptr;
}

std::pair<std::string, Bound> BoundTrace::evaluate(Rule rule, const std::vector<int>& premises,
                                                   const Json& params) const {
  std::vector<const BoundFact*> p;
  for (int id : premises) p.push_back(&fact(id));

  auto supports_disjoint = [&](const AbstractHamiltonian& a, const AbstractHamiltonian& b) {
    if (a.global || b.global) return false;
    for (const auto& x : a.support) {
      for (const auto& y : b.support) {
        if (!regions_disjoint(x, y)) return false;
      }
    }
    return true;
  };
  auto pairwise_disjoint = [&](const std::vector<std::string>& ids) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        if (!supports_disjoint(hamiltonian(ids[i]), hamiltonian(ids[j]))) {
          throw SchemaError("supports of " + ids[i] + " and " + ids[j] +
                            " are not disjoint; composition is not a sum there");
        }
      }
    }
  };

  switch (rule) {
    case Rule::Hypothesis: {
      expect_count(premises, 0, rule);
      return {param_string(params, "quantity"), Bound::from_json(params.at("interval"))};
    }
    case Rule::Normalization: {
      expect_count(premises, 0, rule);
      return {c_of("0"), Bound::exactly(SymExpr(0))};
    }
    case Rule::EnergyCapacity: {
      expect_count(premises, 1, rule);
      const auto region = param_string(params, "region");
      expect_quantity(*p[0], energy_of(region));
      const SymExpr& e = upper(*p[0]);
      return {c_uniform(region), Bound::between(-e, e)};
    }
    case Rule::InverseLowerBound: {
      expect_count(premises, 1, rule);
      const auto region = param_string(params, "region");
      expect_quantity(*p[0], c_uniform(region));
      const SymExpr& e = upper(*p[0]);
      return {c_uniform(region), Bound::between(-e, e)};
    }
    case Rule::TriangleDisjoint: {
      const auto sum = param_string(params, "sum");
      const auto& h = hamiltonian(sum);
      if (h.sum_of.size() < 2) throw SchemaError(sum + " is not declared as a sum");
      expect_count(premises, h.sum_of.size(), rule);
      pairwise_disjoint(h.sum_of);
      SymExpr total;
      for (std::size_t i = 0; i < h.sum_of.size(); ++i) {
        expect_quantity(*p[i], c_of(h.sum_of[i]));
        total += upper(*p[i]);
      }
      return {c_of(sum), Bound::at_most(total)};
    }
    case Rule::TriangleUniform: {
      const auto region = param_string(params, "region");
      const auto& parts = regions_.at(region);
      if (parts.size() < 2) throw SchemaError(region + " is not a union of regions");
      expect_count(premises, parts.size(), rule);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
          if (!regions_disjoint(parts[i], parts[j])) {
            throw SchemaError("parts " + parts[i] + " and " + parts[j] + " of " + region + " are not disjoint");
          }
        }
      }
      SymExpr total;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        expect_quantity(*p[i], c_uniform(parts[i]));
        total += upper(*p[i]);
      }
      return {c_uniform(region), Bound::at_most(total)};
    }
    case Rule::IterateHypothesis: {
      expect_count(premises, 1, rule);
      const auto region = param_string(params, "region");
      expect_quantity(*p[0], c_uniform(region));
      const SymExpr& e = upper(*p[0]);
      if (!p[0]->interval.lo || *p[0]->interval.lo != -e) {
        throw SchemaError("iterate needs the two-sided bound -E <= c <= E");
      }
      const SymExpr delta = SymExpr::from_json(params.at("delta"));
      if (delta.sign() <= 0) throw SchemaError("delta must be positive");
      const std::int64_t m = params.at("m").get<std::int64_t>();
      // smallest m with m delta > 2E
      if (m < 1 || cmp(SymExpr(Rational(m)) * delta, SymExpr(2) * e) <= 0 ||
          (m > 1 && cmp(SymExpr(Rational(m - 1)) * delta, SymExpr(2) * e) > 0)) {
        throw SchemaError("m must be the smallest integer with m*delta > 2E");
      }
      return {"c(H^#" + std::to_string(m) + ") | c(H) = -(" + delta.to_string() + "), H in Ham(" + region + ")",
              Bound::at_most(-(SymExpr(Rational(m)) * delta))};
    }
    case Rule::NonnegLemma: {
      const auto region = param_string(params, "region");
      if (premises.empty() || premises.size() > 2) throw SchemaError("nonneg_lemma takes 1 or 2 premises");
      expect_quantity(*p[0], c_uniform(region));
      const SymExpr& e = upper(*p[0]);
      if (!p[0]->interval.lo || *p[0]->interval.lo != -e) {
        throw SchemaError("nonneg_lemma needs the two-sided bound -E <= c <= E");
      }
      if (e.sign() > 0) {
        if (premises.size() != 2 || p[1]->rule != Rule::IterateHypothesis) {
          throw SchemaError("nonneg_lemma needs the iterated hypothesis when E > 0");
        }
        if (cmp(upper(*p[1]), -e) >= 0) throw SchemaError("the iterate does not leave [-E, E]");
      } else if (e.sign() < 0) {
        throw SchemaError("E must be nonnegative");
      }
      return {c_uniform(region), Bound::between(SymExpr(0), e)};
    }
    case Rule::Instantiate: {
      expect_count(premises, 1, rule);
      const auto h_id = param_string(params, "h");
      const auto& h = hamiltonian(h_id);
      const std::string& q = p[0]->quantity;
      const std::string prefix = "c[Ham(";
      if (q.rfind(prefix, 0) != 0) throw SchemaError("instantiate needs a uniform fact c[Ham(U)]");
      const std::string region = q.substr(prefix.size(), q.size() - prefix.size() - 2);
      if (h.global || h.support.empty()) throw SchemaError(h_id + " has no bounded support");
      for (const auto& r : h.support) {
        if (!region_contains(region, r)) throw SchemaError(h_id + " is not supported in " + region);
      }
      return {c_of(h_id), p[0]->interval};
    }
    case Rule::KillerCertificate: {
      expect_count(premises, 0, rule);
      const auto h_id = param_string(params, "h");
      const auto& h = hamiltonian(h_id);
      if (h.sum_of.size() != 2) throw SchemaError(h_id + " must be declared as restriction + killer");
      const auto& killer = hamiltonian(h.sum_of[1]);
      if (std::find(killer.roles.begin(), killer.roles.end(), "killer") == killer.roles.end()) {
        throw SchemaError(h.sum_of[1] + " is not a killer");
      }
      if (h.support.size() != 1) throw SchemaError(h_id + " must live in a single ball");
      const auto source = param_string(params, "source");
      if (source == "certifier") {
        CertificationInput in;
        in.model = model_from_params(params.at("model"));
        in.r = parse_rational(params.at("r").get<std::string>());
        in.eps = parse_rational(params.at("epsilon").get<std::string>());
        in.E = pi_rational_from_json(params.at("E"));
        if (params.contains("h_max")) in.h_max = pi_rational_from_json(params.at("h_max"));
        const auto cert = certify(in);
        if (cert.status != CertStatus::Certified || param_string(params, "status") != "CERTIFIED") {
          throw SchemaError("killer certificate for " + h_id + " is not CERTIFIED");
        }
      } else if (source != "assumed") {
        throw SchemaError("killer certificate source must be 'certifier' or 'assumed'");
      }
      return {c_of(h_id), Bound::exactly(SymExpr(0))};
    }
    case Rule::KillerSupNorm: {
      expect_count(premises, 0, rule);
      const auto h_id = param_string(params, "h");
      const auto& h = hamiltonian(h_id);
      if (std::find(h.roles.begin(), h.roles.end(), "killer") == h.roles.end()) {
        throw SchemaError(h_id + " is not a killer");
      }
      const Rational r = parse_rational(param_string(params, "r"));
      const Rational eps = parse_rational(param_string(params, "epsilon"));
      const PiRational norm = sup_norm(make_killer(r, eps));
      return {norm_of(h_id), Bound::exactly(SymExpr(norm))};
    }
    case Rule::SupNormDisjoint: {
      const auto sum = param_string(params, "sum");
      const auto& h = hamiltonian(sum);
      if (h.sum_of.empty()) throw SchemaError(sum + " is not declared as a sum");
      expect_count(premises, h.sum_of.size(), rule);
      pairwise_disjoint(h.sum_of);
      std::optional<SymExpr> best;
      for (std::size_t i = 0; i < h.sum_of.size(); ++i) {
        expect_quantity(*p[i], norm_of(h.sum_of[i]));
        if (!p[i]->interval.lo || p[i]->interval.lo != p[i]->interval.hi) {
          throw SchemaError("sup_norm_disjoint needs exact norms");
        }
        const SymExpr& v = upper(*p[i]);
        if (!best || cmp(v, *best) > 0) best = v;
      }
      return {norm_of(sum), Bound::exactly(*best)};
    }
    case Rule::Continuity: {
      expect_count(premises, 2, rule);
      const auto h = param_string(params, "h");
      const auto g = param_string(params, "g");
      const auto diff = param_string(params, "diff");
      auto lhs = atoms(g);
      auto rhs = atoms(h);
      const auto extra = atoms(diff);
      rhs.insert(rhs.end(), extra.begin(), extra.end());
      std::sort(lhs.begin(), lhs.end());
      std::sort(rhs.begin(), rhs.end());
      if (lhs != rhs) throw SchemaError(g + " is not " + h + " + " + diff);
      expect_quantity(*p[0], c_of(g));
      expect_quantity(*p[1], norm_of(diff));
      const SymExpr& n = upper(*p[1]);
      Bound b;
      if (p[0]->interval.lo) b.lo = *p[0]->interval.lo - n;
      if (p[0]->interval.hi) b.hi = *p[0]->interval.hi + n;
      return {c_of(h), b};
    }
    case Rule::Monotonicity:
    case Rule::ZetaMonotonicity: {
      expect_count(premises, 2, rule);
      const auto h = param_string(params, "h");
      const auto g = param_string(params, "g");
      expect_quantity(*p[0], order_of(h, g));
      if (p[0]->rule != Rule::Hypothesis) throw SchemaError("order relations must be declared hypotheses");
      const bool zeta = rule == Rule::ZetaMonotonicity;
      expect_quantity(*p[1], zeta ? zeta_of(g) : c_of(g));
      return {zeta ? zeta_of(h) : c_of(h), Bound::at_most(upper(*p[1]))};
    }
    case Rule::Intersect: {
      expect_count(premises, 2, rule);
      if (p[0]->quantity != p[1]->quantity) throw SchemaError("intersect needs two facts about one quantity");
      Bound b = p[0]->interval;
      const Bound& o = p[1]->interval;
      if (o.lo && (!b.lo || cmp(*o.lo, *b.lo) > 0)) b.lo = o.lo;
      if (o.hi && (!b.hi || cmp(*o.hi, *b.hi) < 0)) b.hi = o.hi;
      if (b.lo && b.hi && cmp(*b.lo, *b.hi) > 0) throw SchemaError("intersection is empty");
      return {p[0]->quantity, b};
    }
    case Rule::ZetaNormalization: {
      expect_count(premises, 0, rule);
      const auto h_id = param_string(params, "h");
      const auto& h = hamiltonian(h_id);
      if (!h.constant) throw SchemaError(h_id + " is not a constant function");
      return {zeta_of(h_id), Bound::exactly(*h.constant)};
    }
    case Rule::ZetaCappedFamily: {
      expect_count(premises, 1, rule);
      const auto family = param_string(params, "family");
      expect_quantity(*p[0], c_of("s*" + family));
      if (lower(*p[0]).sign() < 0) throw SchemaError("zeta_capped_family needs c(sF) >= 0");
      if (upper(*p[0]).has_symbol()) throw SchemaError("cap must not depend on t");
      // 0 <= c(sF)/s <= cap/s -> 0
      return {zeta_of(family), Bound::exactly(SymExpr(0))};
    }
    case Rule::SBound: {
      expect_count(premises, 2, rule);
      const auto f = param_string(params, "f");
      const auto g = param_string(params, "g");
      expect_quantity(*p[0], c_of("s*" + g));
      expect_quantity(*p[1], c_of("-s*" + g));
      return {"S(" + f + "," + g + ")", Bound::at_most(upper(*p[0]) + upper(*p[1]))};
    }
    case Rule::PoissonBracketInequality: {
      expect_count(premises, 2, rule);
      const auto f = param_string(params, "f");
      const auto g = param_string(params, "g");
      expect_quantity(*p[0], "S(" + f + "," + g + ")");
      expect_quantity(*p[1], "||{" + f + "," + g + "}||");
      const auto root = (SymExpr(2) * upper(*p[0]) * upper(*p[1])).sqrt();
      if (!root) throw SchemaError("sqrt(2 S ||{F,G}||) is not a monomial");
      return {"Pi(" + f + "," + g + ")", Bound::between(SymExpr(0), *root)};
    }
    case Rule::QuasiStateStep: {
      expect_count(premises, 3, rule);
      const auto sum = param_string(params, "sum");
      const auto& h = hamiltonian(sum);
      if (h.sum_of.size() != 2) throw SchemaError(sum + " must be declared as a sum of two functions");
      const auto& a = h.sum_of[0];
      const auto& b = h.sum_of[1];
      expect_quantity(*p[0], zeta_of(a));
      expect_quantity(*p[1], zeta_of(b));
      expect_quantity(*p[2], "Pi(" + a + "," + b + ")");
      return {zeta_of(sum), Bound::at_most(upper(*p[0]) + upper(*p[1]) + upper(*p[2]))};
    }
    case Rule::SolveNu: {
      expect_count(premises, 2, rule);
      const auto sum = param_string(params, "sum");
      const auto partition = param_string(params, "partition");
      const SymExpr r_sq = SymExpr::from_json(params.at("r_squared"));
      expect_quantity(*p[0], zeta_of(sum));
      expect_quantity(*p[1], zeta_of(sum));
      const SymExpr& floor_value = lower(*p[0]);
      const SymExpr& cap = upper(*p[1]);
      if (floor_value.has_symbol() || floor_value.sign() <= 0) throw SchemaError("solve_nu needs zeta >= L > 0");
      if (cap.terms().size() != 1 || cap.terms().begin()->first != SymExpr::Key{0, 1}) {
        throw SchemaError("solve_nu needs an upper bound of the form c*t");
      }
      const SymExpr c = SymExpr(cap.terms().begin()->second);
      if (c.sign() <= 0) throw SchemaError("solve_nu needs a positive coefficient of t");
      // L <= c t and t^2 = 2 pi r^2 nu  =>  nu >= L^2 / (2 c^2 pi r^2)
      const auto denom = (SymExpr(2) * c * c * SymExpr::monomial(1, 1) * r_sq).inverse();
      if (!denom) throw SchemaError("r^2 must be a monomial");
      return {"nu_c(" + partition + ")", Bound::at_least(floor_value * floor_value * *denom)};
    }
    case Rule::PbInfimum: {
      expect_count(premises, 1, rule);
      const auto cover = param_string(params, "cover");
      const std::string& q = p[0]->quantity;
      if (q.rfind("nu_c(", 0) != 0) throw SchemaError("pb_infimum needs a bound on nu_c");
      return {"pb(" + cover + ")", Bound::at_least(lower(*p[0]))};
    }
  }
  throw SchemaError("unhandled rule");
}

const BoundFact& BoundTrace::apply(Rule rule, std::vector<int> premises, Json params) {
  auto [quantity, interval] = evaluate(rule, premises, params);
  BoundFact f;
  f.id = static_cast<int>(facts_.size()) + 1;
  f.quantity = std::move(quantity);
  f.interval = std::move(interval);
  f.rule = rule;
  f.premises = std::move(premises);
  f.params = std::move(params);
  facts_.push_back(std::move(f));
  return facts_.back();
}

AuditReport BoundTrace::audit() const {
  AuditReport report;
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    const BoundFact& f = facts_[i];
    const std::string where = "fact " + std::to_string(f.id) + " (" + f.quantity + ")";
    if (f.id != static_cast<int>(i) + 1) {
      report.failures.push_back(where + ": id out of sequence");
      continue;
    }
    if (std::any_of(f.premises.begin(), f.premises.end(), [&](int p) { return p < 1 || p >= f.id; })) {
      report.failures.push_back(where + ": premise does not precede the fact");
      continue;
    }
    if (f.rule == Rule::Hypothesis) ++report.hypotheses;
    try {
      const auto [quantity, interval] = evaluate(f.rule, f.premises, f.params);
      if (quantity != f.quantity) report.failures.push_back(where + ": rule yields quantity " + quantity);
      if (!(interval == f.interval)) report.failures.push_back(where + ": rule yields " + interval.to_string());
      ++report.checked;
    } catch (const std::exception& e) {
      report.failures.push_back(where + ": " + e.what());
    }
  }
  report.passed = report.failures.empty();
  return report;
}

Json BoundTrace::to_json() const {
  Json regions = Json::array();
  for (const auto& [id, parts] : regions_) regions.push_back(Json{{"id", id}, {"parts", parts}});
  Json disjoint = Json::array();
  for (const auto& [a, b] : disjoint_) disjoint.push_back(Json::array({a, b}));
  Json hams = Json::array();
  for (const auto& id : hamiltonian_order_) {
    const auto& h = hamiltonians_.at(id);
    hams.push_back(Json{{"id", h.id},
                        {"support", h.support},
                        {"global", h.global},
                        {"roles", h.roles},
                        {"sum_of", h.sum_of},
                        {"constant", h.constant ? h.constant->to_json() : Json(nullptr)}});
  }
  Json facts = Json::array();
  for (const auto& f : facts_) {
    facts.push_back(Json{{"fact_id", f.id},
                         {"quantity", f.quantity},
                         {"interval", f.interval.to_json()},
                         {"rule", to_string(f.rule)},
                         {"premises", f.premises},
                         {"params", f.params}});
  }
  Json j{{"regions", std::move(regions)},
         {"disjoint", std::move(disjoint)},
         {"hamiltonians", std::move(hams)},
         {"facts", std::move(facts)}};
  j["final"] = facts_.empty() ? Json(nullptr)
                              : Json{{"quantity", facts_.back().quantity},
                                     {"interval", facts_.back().interval.to_json()}};
  return j;
}

BoundTrace BoundTrace::from_json(const Json& j) {
  BoundTrace t;
  // regions may reference each other; insert leaves first
  std::vector<std::pair<std::string, std::vector<std::string>>> pending;
  for (const auto& r : j.at("regions")) {
    pending.emplace_back(r.at("id").get<std::string>(), r.at("parts").get<std::vector<std::string>>());
  }
  while (!pending.empty()) {
    const auto before = pending.size();
    for (auto it = pending.begin(); it != pending.end();) {
      const bool ready = std::all_of(it->second.begin(), it->second.end(),
                                     [&](const std::string& p) { return t.regions_.count(p) > 0; });
      if (ready) {
        t.declare_region(it->first, it->second);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
    if (pending.size() == before) throw SchemaError("region declarations are cyclic or incomplete");
  }
  for (const auto& d : j.at("disjoint")) t.declare_disjoint(d.at(0).get<std::string>(), d.at(1).get<std::string>());
  for (const auto& h : j.at("hamiltonians")) {
    AbstractHamiltonian a;
    a.id = h.at("id").get<std::string>();
    a.support = h.at("support").get<std::set<std::string>>();
    a.global = h.at("global").get<bool>();
    a.roles = h.at("roles").get<std::vector<std::string>>();
    a.sum_of = h.at("sum_of").get<std::vector<std::string>>();
    if (!h.at("constant").is_null()) a.constant = SymExpr::from_json(h.at("constant"));
    t.declare_hamiltonian(std::move(a));
  }
  for (const auto& f : j.at("facts")) {
    BoundFact fact;
    fact.id = f.at("fact_id").get<int>();
    fact.quantity = f.at("quantity").get<std::string>();
    fact.interval = Bound::from_json(f.at("interval"));
    fact.rule = rule_from_string(f.at("rule").get<std::string>());
    fact.premises = f.at("premises").get<std::vector<int>>();
    fact.params = f.at("params");
    t.facts_.push_back(std::move(fact));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Derivations

int derive_nonneg(BoundTrace& trace, const std::string& region, int uniform_bound, const Rational& delta_fraction) {
  const int two_sided = trace.apply(Rule::InverseLowerBound, {uniform_bound}, Json{{"region", region}}).id;
  const SymExpr e = *trace.fact(two_sided).interval.hi;
  if (e.is_zero()) return trace.apply(Rule::NonnegLemma, {two_sided}, Json{{"region", region}}).id;
  if (delta_fraction <= 0) throw InvalidParameter("delta fraction must be positive");
  // hypothetical c(H) = -delta; smallest m with m delta > 2E is floor(2/fraction) + 1
  const SymExpr delta = SymExpr(delta_fraction) * e;
  const std::int64_t m = (floor(Rational(2) / delta_fraction) + 1).convert_to<std::int64_t>();
  const int iterate =
      trace.apply(Rule::IterateHypothesis, {two_sided}, Json{{"region", region}, {"delta", delta.to_json()}, {"m", m}})
          .id;
  return trace.apply(Rule::NonnegLemma, {two_sided, iterate}, Json{{"region", region}}).id;
}

BoundTrace derive_nonneg(const std::string& region, const PiRational& E, const Rational& delta_fraction) {
  if (E.sign() < 0) throw InvalidParameter("E must be nonnegative");
  BoundTrace trace;
  trace.declare_region(region);
  const int bound = trace
                        .apply(Rule::Hypothesis, {},
                               Json{{"quantity", c_uniform(region)},
                                    {"interval", Bound::at_most(SymExpr(E)).to_json()},
                                    {"source", "c <= E for every Hamiltonian supported in the region"}})
                        .id;
  derive_nonneg(trace, region, bound, delta_fraction);
  return trace;
}

BoundTrace derive_theorem_bound(const std::vector<BallSpec>& balls, const ManifoldModel& model,
                                const TheoremBoundOptions& options) {
  if (balls.empty()) throw InvalidParameter("at least one ball is required");
  model.validate();
  std::vector<std::string> problems;
  std::vector<SpectralCertificate> certificates;
  for (const auto& b : balls) {
    const PiRational area = PiRational::pi_times(b.r * b.r);
    if (b.r <= 0) problems.push_back("ball " + b.id + ": radius must be positive");
    if (b.E < area) problems.push_back("ball " + b.id + ": E < pi r^2 contradicts energy-capacity");
    if (model.mode == ManifoldMode::Monotone && PiRational(abs(model.lambda) / 2) <= b.E) {
      problems.push_back("ball " + b.id + ": E >= |lambda|/2");
    }
    if (options.killers == KillerSource::Certified && problems.empty()) {
      CertificationInput in;
      in.model = model;
      in.r = b.r;
      in.eps = options.eps_fraction * b.r;
      in.E = b.E;
      auto cert = certify(in);
      if (cert.status != CertStatus::Certified) {
        problems.push_back("ball " + b.id + ": killer certificate is " + to_string(cert.status));
      }
      certificates.push_back(std::move(cert));
    }
  }
  if (!problems.empty()) throw PreconditionError(problems);

  const std::size_t k = balls.size();
  BoundTrace t;
  std::vector<std::string> ball_ids;
  for (const auto& b : balls) {
    t.declare_region(b.id);
    ball_ids.push_back(b.id);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) t.declare_disjoint(ball_ids[i], ball_ids[j]);
  }
  const std::string U = k == 1 ? ball_ids[0] : "U";
  if (k > 1) t.declare_region(U, ball_ids);

  std::vector<std::string> hs, ks, hks;
  for (const auto& b : balls) {
    const std::string h = "H_" + b.id, kk = "K_" + b.id, hk = "H_" + b.id + "+K_" + b.id;
    t.declare_hamiltonian({h, {b.id}, false, {"restriction"}, {}, std::nullopt});
    t.declare_hamiltonian({kk, {b.id}, false, {"killer"}, {}, std::nullopt});
    t.declare_hamiltonian({hk, {b.id}, false, {"killed restriction"}, {h, kk}, std::nullopt});
    hs.push_back(h);
    ks.push_back(kk);
    hks.push_back(hk);
  }
  const std::string H = k == 1 ? hs[0] : "H";
  const std::string K = k == 1 ? ks[0] : "K";
  const std::string HK = k == 1 ? hks[0] : "H+K";
  if (k > 1) {
    t.declare_hamiltonian({H, {U}, false, {"hamiltonian"}, hs, std::nullopt});
    t.declare_hamiltonian({K, {U}, false, {"killer sum"}, ks, std::nullopt});
    t.declare_hamiltonian({HK, {U}, false, {"H + sum of killers"}, hks, std::nullopt});
  }

  std::vector<int> uniform, restricted;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& b = balls[i];
    const int e = t.apply(Rule::Hypothesis, {},
                          Json{{"quantity", energy_of(b.id)},
                               {"interval", Bound::exactly(SymExpr(b.E)).to_json()},
                               {"source", "displacement energy of the ball (input)"}})
                      .id;
    uniform.push_back(t.apply(Rule::EnergyCapacity, {e}, Json{{"region", b.id}}).id);
    restricted.push_back(t.apply(Rule::Instantiate, {uniform.back()}, Json{{"h", hs[i]}}).id);
  }
  int sum_bound_uniform = uniform[0];
  if (k > 1) {
    t.apply(Rule::TriangleDisjoint, restricted, Json{{"sum", H}});
    sum_bound_uniform = t.apply(Rule::TriangleUniform, uniform, Json{{"region", U}}).id;
  }
  const int nonneg = derive_nonneg(t, U, sum_bound_uniform, options.delta_fraction);
  const int h_nonneg = t.apply(Rule::Instantiate, {nonneg}, Json{{"h", H}}).id;

  std::vector<int> killed;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& b = balls[i];
    Json params{{"h", hks[i]}, {"ball", b.id}};
    if (options.killers == KillerSource::Certified) {
      params["source"] = "certifier";
      params["status"] = to_string(certificates[i].status);
      params["model"] = model_params(model);
      params["r"] = format_rational(b.r);
      params["epsilon"] = format_rational(options.eps_fraction * b.r);
      params["E"] = pi_rational_json(b.E);
      params["chosen_m"] = pi_rational_json(certificates[i].chosen_m);
      params["table_rows"] = certificates[i].table.size();
    } else {
      params["source"] = "assumed";
    }
    killed.push_back(t.apply(Rule::KillerCertificate, {}, std::move(params)).id);
  }
  int hk_upper = killed[0];
  if (k > 1) hk_upper = t.apply(Rule::TriangleDisjoint, killed, Json{{"sum", HK}}).id;
  const int hk_lower = t.apply(Rule::Instantiate, {nonneg}, Json{{"h", HK}}).id;
  const int hk_zero = t.apply(Rule::Intersect, {hk_upper, hk_lower}).id;

  std::vector<int> norms;
  for (std::size_t i = 0; i < k; ++i) {
    norms.push_back(t.apply(Rule::KillerSupNorm, {},
                            Json{{"h", ks[i]},
                                 {"r", format_rational(balls[i].r)},
                                 {"epsilon", format_rational(options.eps_fraction * balls[i].r)}})
                        .id);
  }
  int k_norm = norms[0];
  if (k > 1) k_norm = t.apply(Rule::SupNormDisjoint, norms, Json{{"sum", K}}).id;
  const int continuity = t.apply(Rule::Continuity, {hk_zero, k_norm}, Json{{"h", H}, {"g", HK}, {"diff", K}}).id;
  t.apply(Rule::Intersect, {h_nonneg, continuity});
  return t;
}

const BoundFact& zeta_of_capped_family(BoundTrace& trace, const std::string& family, const SymExpr& bound) {
  const std::string scaled = "s*" + family;
  if (!trace.has_hamiltonian(scaled)) {
    const auto& f = trace.hamiltonian(family);
    trace.declare_hamiltonian({scaled, f.support, f.global, {"positive multiple of " + family}, {}, std::nullopt});
  }
  const int cap = trace
                      .apply(Rule::Hypothesis, {},
                             Json{{"quantity", c_of(scaled)},
                                  {"interval", Bound::between(SymExpr(0), bound).to_json()},
                                  {"source", "0 <= c(sF) <= cap for all s > 0"}})
                      .id;
  return trace.apply(Rule::ZetaCappedFamily, {cap}, Json{{"family", family}});
}

PbBound pb_lower_bound(int d, const SymExpr& r_squared) {
  if (d < 1) throw InvalidParameter("d must be >= 1");
  if (r_squared.has_symbol() || r_squared.sign() <= 0 || !r_squared.inverse()) {
    throw InvalidParameter("r^2 must be a positive monomial in pi");
  }
  const SymExpr area = SymExpr::monomial(1, 1) * r_squared;  // pi r^2
  // nu_c written through t = sqrt(2 pi r^2 nu_c)
  const SymExpr nu = SymExpr::monomial(1, 0, 2) * *(SymExpr(2) * area).inverse();

  BoundTrace t;
  t.declare_region("M");
  std::vector<std::string> families;
  for (int j = 1; j <= d + 1; ++j) {
    const std::string w = "W_" + std::to_string(j);
    t.declare_region(w);
    families.push_back("F_" + std::to_string(j));
  }
  t.declare_hamiltonian({"0", {}, true, {"zero"}, {}, SymExpr(0)});
  const int zero = t.apply(Rule::Normalization, {}).id;

  std::vector<int> zeta_f, c_pos, c_neg;
  for (int j = 1; j <= d + 1; ++j) {
    const std::string w = "W_" + std::to_string(j);
    const std::string f = families[j - 1];
    t.declare_hamiltonian({f, {w}, false, {"sum of partition members supported in " + w}, {}, std::nullopt});
    t.declare_hamiltonian({"s*" + f, {w}, false, {"positive multiple of " + f}, {}, std::nullopt});
    t.declare_hamiltonian({"-s*" + f, {w}, false, {"negative multiple of " + f}, {}, std::nullopt});
    const int theorem =
        t.apply(Rule::Hypothesis, {},
                Json{{"quantity", c_uniform(w)},
                     {"interval", Bound::between(SymExpr(0), area).to_json()},
                     {"source", "disjoint-ball bound: " + w + " is a union of disjoint balls of radius <= r"}})
            .id;
    c_pos.push_back(t.apply(Rule::Instantiate, {theorem}, Json{{"h", "s*" + f}}).id);
    const int order = t.apply(Rule::Hypothesis, {},
                              Json{{"quantity", order_of("-s*" + f, "0")},
                                   {"interval", Bound{}.to_json()},
                                   {"source", "partition members are nonnegative"}})
                          .id;
    c_neg.push_back(t.apply(Rule::Monotonicity, {order, zero}, Json{{"h", "-s*" + f}, {"g", "0"}}).id);
    zeta_f.push_back(t.apply(Rule::ZetaCappedFamily, {c_pos.back()}, Json{{"family", f}}).id);
  }

  std::string g_prev = families[0];
  int zeta_prev = zeta_f[0];
  for (int k = 1; k <= d; ++k) {
    const std::string f_next = families[k];
    const std::string g_next = "G_" + std::to_string(k + 1);
    const bool last = k == d;
    t.declare_hamiltonian({g_next, last ? std::set<std::string>{} : std::set<std::string>{"M"}, last,
                           {last ? "sum of the whole partition" : "prefix sum"}, {g_prev, f_next},
                           last ? std::optional<SymExpr>(SymExpr(1)) : std::nullopt});
    const int s_bound =
        t.apply(Rule::SBound, {c_pos[k], c_neg[k]}, Json{{"f", g_prev}, {"g", f_next}}).id;
    const int bracket = t.apply(Rule::Hypothesis, {},
                                Json{{"quantity", "||{" + g_prev + "," + f_next + "}||"},
                                     {"interval", Bound::between(SymExpr(0), nu).to_json()},
                                     {"source", "bilinearity: both are 0/1 combinations of the partition, so the "
                                                "bracket norm is at most nu_c"}})
                            .id;
    const int pb = t.apply(Rule::PoissonBracketInequality, {s_bound, bracket}, Json{{"f", g_prev}, {"g", f_next}}).id;
    zeta_prev = t.apply(Rule::QuasiStateStep, {zeta_prev, zeta_f[k], pb}, Json{{"sum", g_next}}).id;
    g_prev = g_next;
  }
  const int normal = t.apply(Rule::ZetaNormalization, {}, Json{{"h", g_prev}}).id;
  const int nu_fact = t.apply(Rule::SolveNu, {normal, zeta_prev},
                              Json{{"sum", g_prev}, {"partition", "f"}, {"r_squared", r_squared.to_json()}})
                          .id;
  t.apply(Rule::PbInfimum, {nu_fact}, Json{{"cover", "U"}});
  SymExpr bound = *t.last().interval.lo;
  return {std::move(bound), std::move(t)};
}

PbBound pb_lower_bound(int d, const Rational& r) {
  if (r <= 0) throw InvalidParameter("radius must be positive");
  return pb_lower_bound(d, SymExpr(r * r));
}

double pb_lower_bound_value(int d, double r) {
  if (d < 1) throw InvalidParameter("d must be >= 1");
  if (!(r > 0)) throw InvalidParameter("radius must be positive");
  return 1.0 / (2.0 * d * d * std::numbers::pi * r * r);
}

}  // namespace specpb
