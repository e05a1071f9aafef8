#include "specpb/floer.hpp"

namespace specpb {

bool ManifoldModel::is_capping(std::int64_t c1) const {
  if (!allows_recapping()) return c1 == 0;
  return c1 % chern_gen == 0;
}

void ManifoldModel::validate() const {
  if (n < 1) throw InvalidParameter("half-dimension n must be >= 1");
  if (chern_gen < 1) throw InvalidParameter("minimal Chern number N must be >= 1");
  if (mode == ManifoldMode::Monotone && lambda == 0) {
    throw InvalidParameter("monotonicity constant lambda must be nonzero");
  }
}

PiRational base_action_circle(const OrbitCircle& c) {
  return c.f_value - PiRational::pi_times(Rational(2 * c.l) * c.s_star);
}

std::int64_t trivial_index(int morse_index, const ManifoldModel& model, std::int64_t c1) {
  if (morse_index < 0 || morse_index > 2 * model.n) {
    throw InvalidParameter("Morse index must lie in [0, 2n]");
  }
  if (!model.is_capping(c1)) throw InvalidParameter("c1 is not a valid capping class");
  return morse_index - model.n - 2 * c1;
}

std::int64_t circle_base_index(std::int64_t l, int concavity, int branch, int n) {
  if (branch != 1 && branch != 2) throw InvalidParameter("branch must be 1 or 2");
  if (concavity != 1 && concavity != -1) throw InvalidParameter("concavity must be +1 or -1");
  const std::int64_t winding = -2 * l * n;
  if (branch == 1) return concavity > 0 ? winding - n : winding - n + 1;
  return concavity > 0 ? winding + n - 1 : winding + n;
}

std::int64_t circle_index(const OrbitCircle& c, int branch, const ManifoldModel& model, std::int64_t c1) {
  if (!model.is_capping(c1)) throw InvalidParameter("c1 is not a valid capping class");
  return circle_base_index(c.l, c.concavity, branch, model.n) - 2 * c1;
}

CappedOrbitClass make_trivial_class(int plateau_id, const PiRational& plateau_value, int morse_index,
                                    const ManifoldModel& model) {
  CappedOrbitClass o;
  o.kind = TrivialOrbit{plateau_id, morse_index};
  o.c1 = 0;
  o.action = {plateau_value, 0};
  o.index = trivial_index(morse_index, model, 0);
  return o;
}

CappedOrbitClass make_circle_class(const OrbitCircle& c, int branch, const ManifoldModel& model) {
  CappedOrbitClass o;
  o.kind = CircleOrbit{c, branch};
  o.c1 = 0;
  o.action = {base_action_circle(c), 0};
  o.index = circle_index(c, branch, model, 0);
  return o;
}

CappedOrbitClass recap(const CappedOrbitClass& o, std::int64_t a_c1, const ManifoldModel& model) {
  if (a_c1 == 0) return o;
  if (!model.allows_recapping()) throw InvalidParameter("recapping is unavailable on an aspherical model");
  if (!model.is_capping(a_c1)) throw InvalidParameter("c1(A) must be a multiple of the minimal Chern number");
  CappedOrbitClass out = o;
  out.c1 += a_c1;
  out.index -= 2 * a_c1;
  out.action.lambda_coeff -= a_c1;
  return out;
}

std::vector<std::pair<int, std::int64_t>> index_n_solutions(std::int64_t l, int concavity,
                                                            const ManifoldModel& model) {
  std::vector<std::pair<int, std::int64_t>> out;
  for (int branch : {1, 2}) {
    const std::int64_t excess = circle_base_index(l, concavity, branch, model.n) - model.n;
    if (excess % 2 != 0) continue;
    const std::int64_t c1 = excess / 2;
    if (model.is_capping(c1)) out.emplace_back(branch, c1);
  }
  return out;
}

std::vector<std::pair<int, std::int64_t>> index_n_solutions(const OrbitCircle& c, const ManifoldModel& model) {
  return index_n_solutions(c.l, c.concavity, model);
}

Json to_json(const CappedOrbitClass& o) {
  Json j;
  if (const auto* t = std::get_if<TrivialOrbit>(&o.kind)) {
    j["kind"] = "trivial";
    j["plateau_id"] = t->plateau_id;
    j["circle"] = nullptr;
    j["branch"] = nullptr;
    j["morse_index"] = t->morse_index;
  } else {
    const auto& c = std::get<CircleOrbit>(o.kind);
    j["kind"] = "circle";
    j["plateau_id"] = nullptr;
    j["circle"] = Json{{"s", format_rational(c.circle.s_star)}, {"l", c.circle.l}, {"concavity", c.circle.concavity}};
    j["branch"] = c.branch;
    j["morse_index"] = nullptr;
  }
  j["c1"] = o.c1;
  j["action"] = Json{{"rat", format_rational(o.action.base.rat())},
                     {"pi", format_rational(o.action.base.pi())},
                     {"lambda", format_rational(o.action.lambda_coeff)}};
  j["index"] = o.index;
  return j;
}

}  // namespace specpb
