#include "specpb/certifier.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace specpb {

namespace {

constexpr std::int64_t kDefaultLWindow = 10000;

PiRational pi_r_squared(const Rational& r) { return PiRational::pi_times(r * r); }

std::string mode_name(ManifoldMode m) { return m == ManifoldMode::Monotone ? "monotone" : "aspherical"; }

// First j in [0, count) with pred(j) true, count if none; pred must be
// monotone (false ... false true ... true).
std::int64_t first_true(std::int64_t count, const std::function<bool(std::int64_t)>& pred) {
  std::int64_t lo = 0;
  std::int64_t hi = count;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// x with a*x = 1 mod m, for gcd(a, m) = 1 and m >= 1.
std::int64_t inverse_mod(std::int64_t a, std::int64_t m) {
  if (m == 1) return 0;
  std::int64_t old_r = ((a % m) + m) % m, r = m;
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
  }
  return ((old_s % m) + m) % m;
}

std::int64_t mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

int step_of_corner(const Rational& s_star, const std::array<Rational, 4>& shell) {
  for (int k = 0; k < 4; ++k) {
    if (shell[k] == s_star) return 4 + k;
  }
  throw std::logic_error("certification profile has a corner off the shell nodes");
}

// Orbit rows of one corner family (fixed corner, winding sign, branch).
void enumerate_corner_family(const CertificationInput& in, const CornerWindings& corner, int step, int branch,
                             const PiRational& tau, std::int64_t l_window, std::vector<OrbitVerdict>& rows,
                             std::vector<FamilyWindow>* windows) {
  const ManifoldModel& model = in.model;
  const int n = model.n;
  const std::int64_t kappa = circle_base_index(0, corner.concavity, branch, n);
  if ((kappa - n) % 2 != 0) return;
  // index n forces c1(l) = -n l + c1_0
  const std::int64_t c1_0 = (kappa - n) / 2;
  const Rational lambda = model.effective_lambda();

  FamilyWindow w;
  w.step = step;
  w.s_star = corner.s_star;
  w.concavity = corner.concavity;
  w.branch = branch;
  w.l_min = corner.l_min;
  w.l_max = corner.l_max;
  w.intercept = corner.f_value - PiRational(lambda * c1_0);
  w.slope = PiRational(lambda * n) - PiRational::pi_times(2 * corner.s_star);

  bool any = false;
  if (model.allows_recapping()) {
    const std::int64_t N = model.chern_gen;
    const std::int64_t g = std::gcd<std::int64_t>(n, N);
    if (c1_0 % g == 0) {
      w.stride = N / g;
      const std::int64_t residue = mod((c1_0 / g) * inverse_mod(n / g, w.stride), w.stride);
      w.l_first = corner.l_min + mod(residue - corner.l_min, w.stride);
      any = w.l_first <= corner.l_max;
    }
  } else if (c1_0 % n == 0) {
    w.stride = 1;
    w.l_first = c1_0 / n;
    any = w.l_first >= corner.l_min && w.l_first <= corner.l_max;
  }
  if (any) {
    w.admissible = model.allows_recapping() ? (corner.l_max - w.l_first) / w.stride + 1 : 1;
  }

  auto winding = [&](std::int64_t j) { return w.l_first + w.stride * j; };
  auto action_at = [&](std::int64_t j) { return w.intercept + w.slope * Rational(winding(j)); };
  const PiRational band_lo = -tau;
  const PiRational band_hi = in.E + tau;

  if (w.admissible > 0) {
    const bool increasing = w.slope.sign() * w.stride > 0;
    std::int64_t a = 0;
    std::int64_t b = 0;
    if (increasing) {
      a = first_true(w.admissible, [&](std::int64_t j) { return action_at(j) >= band_lo; });
      b = first_true(w.admissible, [&](std::int64_t j) { return action_at(j) > band_hi; });
    } else {
      a = first_true(w.admissible, [&](std::int64_t j) { return action_at(j) <= band_hi; });
      b = first_true(w.admissible, [&](std::int64_t j) { return action_at(j) < band_lo; });
    }
    if (b - a > l_window) {
      std::ostringstream os;
      os << "step " << step << ": " << (b - a) << " windings act inside [-tau, E + tau], more than l_window = "
         << l_window;
      throw WindowOverflow(os.str());
    }
    std::vector<std::int64_t> picks;
    for (std::int64_t j = a; j < b; ++j) {
      w.in_band.push_back(winding(j));
      picks.push_back(j);
    }
    if (a - 1 >= 0) {
      w.witnesses.push_back(winding(a - 1));
      picks.push_back(a - 1);
    }
    if (b < w.admissible) {
      w.witnesses.push_back(winding(b));
      picks.push_back(b);
    }
    w.excluded = w.admissible - static_cast<std::int64_t>(picks.size());

    // Outside the band the witnesses bound everything beyond them.
    w.exclusion_verified = true;
    if (a - 1 >= 0) {
      const PiRational v = action_at(a - 1);
      w.exclusion_verified = w.exclusion_verified && (increasing ? v < band_lo : v > band_hi);
    }
    if (b < w.admissible) {
      const PiRational v = action_at(b);
      w.exclusion_verified = w.exclusion_verified && (increasing ? v > band_hi : v < band_lo);
    }

    for (std::int64_t j : picks) {
      const std::int64_t l = winding(j);
      const std::int64_t c1 = -static_cast<std::int64_t>(n) * l + c1_0;
      CappedOrbitClass o = recap(make_circle_class(corner.circle(l), branch, model), c1, model);
      if (o.index != n) throw std::logic_error("corner family produced an orbit of index != n");
      OrbitVerdict row{std::move(o), {}, Verdict::Zero, step};
      row.action = row.orbit.action.value(model);
      if (row.action != action_at(j)) throw std::logic_error("corner family action disagrees with its affine form");
      row.verdict = classify(row.action, in.E, tau);
      rows.push_back(std::move(row));
    }
  } else {
    w.exclusion_verified = true;
  }
  if (windows) windows->push_back(std::move(w));
}

void enumerate_plateau(const CertificationInput& in, int step, const PiRational& value, const PiRational& tau,
                       std::vector<OrbitVerdict>& rows) {
  const ManifoldModel& model = in.model;
  for (std::int64_t c1 = -model.n; c1 <= 0; ++c1) {
    if (!model.is_capping(c1)) continue;
    const int morse = static_cast<int>(2 * model.n + 2 * c1);
    CappedOrbitClass o = recap(make_trivial_class(step, value, morse, model), c1, model);
    OrbitVerdict row{std::move(o), {}, Verdict::Zero, step};
    row.action = row.orbit.action.value(model);
    row.verdict = classify(row.action, in.E, tau);
    rows.push_back(std::move(row));
  }
}

}  // namespace

PiRational CertificationInput::effective_tau() const {
  if (tau) return *tau;
  return PiRational::pi_times(r * r / 1000000);
}

PiRational CertificationInput::effective_plateau() const {
  if (plateau) return *plateau;
  return PiRational::pi_times(-r * r);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Zero: return "ZERO";
    case Verdict::Negative: return "NEGATIVE";
    case Verdict::AboveE: return "ABOVE_E";
    case Verdict::ForbiddenInRange: return "FORBIDDEN_IN_RANGE";
  }
  return "?";
}

std::string to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Certified: return "CERTIFIED";
    case CertStatus::Refuted: return "REFUTED";
    case CertStatus::InvalidInput: return "INVALID_INPUT";
  }
  return "?";
}

Verdict classify(const PiRational& action, const PiRational& E, const PiRational& tau) {
  if (abs(action) <= tau) return Verdict::Zero;
  if (action < -tau) return Verdict::Negative;
  if (action > E) return Verdict::AboveE;
  return Verdict::ForbiddenInRange;
}

std::int64_t OrbitVerdict::winding() const {
  if (const auto* c = std::get_if<CircleOrbit>(&orbit.kind)) return c->circle.l;
  return 0;
}

std::vector<std::string> check_preconditions(const CertificationInput& in) {
  std::vector<std::string> v;
  try {
    in.model.validate();
  } catch (const InvalidParameter& e) {
    v.emplace_back(e.what());
  }
  if (in.r <= 0) v.emplace_back("radius r must be positive");
  if (in.eps <= 0) v.emplace_back("epsilon must be positive");
  if (in.eps * 4 >= in.r) v.emplace_back("epsilon must be smaller than r/4");
  if (in.E.sign() <= 0) v.emplace_back("E must be positive");
  const PiRational tau = in.effective_tau();
  if (tau.sign() <= 0) v.emplace_back("tau must be positive");
  if (tau >= in.E) v.emplace_back("tau must be smaller than E");
  if (in.h_max.sign() < 0) v.emplace_back("h_max must be nonnegative");
  if (in.l_window && *in.l_window < 0) v.emplace_back("l_window must be nonnegative");

  const PiRational area = pi_r_squared(in.r);
  if (in.model.mode == ManifoldMode::Monotone) {
    if (area > in.E) v.emplace_back("pi r^2 <= E is violated");
    if (PiRational(abs(in.model.lambda) / 2) <= in.E) v.emplace_back("E < |lambda|/2 is violated");
  }
  if (in.plateau) {
    if (*in.plateau < -area || in.plateau->sign() > 0) {
      v.emplace_back("plateau value must lie in [-pi r^2, 0]");
    }
  }
  if (in.m && v.empty()) {
    const PiRational threshold = max(in.h_max + area, in.E) + tau;
    if (*in.m <= threshold) v.emplace_back("m must exceed max(h_max + pi r^2, E) + tau");
  }
  return v;
}

PiRational inner_corner_spacing(const CertificationInput& in) {
  const Rational inner = in.r - 4 * in.eps;
  return abs(PiRational(in.model.effective_lambda() * in.model.n) - PiRational::pi_times(inner * inner));
}

PiRational choose_m(const CertificationInput& in) {
  const PiRational spacing = inner_corner_spacing(in);
  const PiRational threshold = max(in.h_max + pi_r_squared(in.r), in.E) + in.effective_tau();
  return spacing * Rational(smallest_multiple_above(spacing, threshold));
}

std::vector<OrbitVerdict> enumerate_index_n(const CertificationInput& in, const PiRational& m,
                                            std::vector<FamilyWindow>* windows) {
  const PiRational tau = in.effective_tau();
  const PiRational plateau = in.effective_plateau();
  const std::int64_t l_window = in.l_window.value_or(kDefaultLWindow);
  const ManifoldModel& model = in.model;

  std::vector<OrbitVerdict> rows;
  {
    // the maximum at the origin, trivially capped
    CappedOrbitClass o = make_trivial_class(1, m, 2 * model.n, model);
    OrbitVerdict row{std::move(o), {}, Verdict::Zero, 1};
    row.action = row.orbit.action.value(model);
    row.verdict = classify(row.action, in.E, tau);
    rows.push_back(std::move(row));
  }
  enumerate_plateau(in, 2, plateau, tau, rows);
  enumerate_plateau(in, 3, PiRational(0), tau, rows);

  const RadialProfile profile = make_certification_profile(in.r, in.eps, m, plateau);
  const auto shell = shell_nodes(in.r, in.eps);
  for (const auto& corner : corner_windings(profile)) {
    const int step = step_of_corner(corner.s_star, shell);
    for (int branch : {1, 2}) enumerate_corner_family(in, corner, step, branch, tau, l_window, rows, windows);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const OrbitVerdict& a, const OrbitVerdict& b) {
    return std::make_tuple(a.step, a.winding(), a.orbit.c1) < std::make_tuple(b.step, b.winding(), b.orbit.c1);
  });
  return rows;
}

SpectralCertificate certify(const CertificationInput& in) {
  SpectralCertificate cert;
  cert.input = in;
  cert.violations = check_preconditions(in);
  if (!cert.violations.empty()) {
    cert.status = CertStatus::InvalidInput;
    return cert;
  }
  cert.chosen_m = in.m ? *in.m : choose_m(in);
  cert.table = enumerate_index_n(in, cert.chosen_m, &cert.windows);

  const auto offender = std::find_if(cert.table.begin(), cert.table.end(), [](const OrbitVerdict& row) {
    return row.verdict == Verdict::ForbiddenInRange;
  });
  if (!cert.table.empty() && offender == cert.table.end()) {
    cert.status = CertStatus::Certified;
  } else {
    cert.status = CertStatus::Refuted;
    if (offender != cert.table.end()) cert.offender = *offender;
  }

  cert.frame = {
      "c(F) lies in [0, E]: energy-capacity bound for the displaceable ball plus nonnegativity",
      "spectrality: c(F) is the action of a capped 1-periodic orbit of Conley-Zehnder index n",
      "every index-n action in the table is within tau of 0, negative, or above E; windings "
      "outside each family window act further from [-tau, E + tau]",
  };
  cert.frame.push_back(cert.status == CertStatus::Certified
                           ? "therefore c(F) = 0 up to the smoothing tolerance tau"
                           : "an index-n action lies in (tau, E]; c(F) = 0 is not established");
  return cert;
}

SpectralCertificate probe_plateau(CertificationInput in, const PiRational& a) {
  const PiRational area = pi_r_squared(in.r);
  if (a < -area || a.sign() > 0) throw InvalidParameter("probe plateau must lie in [-pi r^2, 0]");
  in.plateau = a;
  return certify(in);
}

Json to_json(const OrbitVerdict& v) {
  Json j;
  j["step"] = v.step;
  const Json orbit = to_json(v.orbit);
  for (const auto& [key, value] : orbit.items()) j[key] = value;
  j["action_value"] = pi_rational_json(v.action);
  j["action_approx"] = round12(v.action.approx());
  j["verdict"] = to_string(v.verdict);
  return j;
}

Json parameters_json(const CertificationInput& in) {
  Json p;
  p["n"] = in.model.n;
  p["lambda"] = format_rational(in.model.lambda);
  p["N"] = in.model.chern_gen;
  p["mode"] = mode_name(in.model.mode);
  p["r"] = format_rational(in.r);
  p["epsilon"] = format_rational(in.eps);
  p["E"] = pi_rational_json(in.E);
  p["tau"] = pi_rational_json(in.effective_tau());
  p["h_max"] = pi_rational_json(in.h_max);
  p["m_override"] = in.m ? pi_rational_json(*in.m) : Json(nullptr);
  p["plateau"] = pi_rational_json(in.effective_plateau());
  p["l_window"] = in.l_window.value_or(kDefaultLWindow);
  return p;
}

Json to_json(const SpectralCertificate& cert) {
  Json j;
  j["status"] = to_string(cert.status);
  j["violations"] = cert.violations;
  j["chosen_m"] = cert.status == CertStatus::InvalidInput ? Json(nullptr) : pi_rational_json(cert.chosen_m);
  j["parameters"] = parameters_json(cert.input);
  j["frame"] = cert.frame;
  j["offender"] = cert.offender ? to_json(*cert.offender) : Json(nullptr);
  Json windows = Json::array();
  for (const auto& w : cert.windows) {
    windows.push_back(Json{{"step", w.step},
                           {"s", format_rational(w.s_star)},
                           {"concavity", w.concavity},
                           {"branch", w.branch},
                           {"l_range", Json::array({w.l_min, w.l_max})},
                           {"l_first", w.l_first},
                           {"stride", w.stride},
                           {"admissible", w.admissible},
                           {"intercept", pi_rational_json(w.intercept)},
                           {"slope", pi_rational_json(w.slope)},
                           {"in_band", w.in_band},
                           {"witnesses", w.witnesses},
                           {"excluded", w.excluded},
                           {"exclusion_verified", w.exclusion_verified}});
  }
  j["windows"] = std::move(windows);
  Json table = Json::array();
  for (const auto& row : cert.table) table.push_back(to_json(row));
  j["table"] = std::move(table);
  return j;
}

std::string certificate_csv(const SpectralCertificate& cert) {
  std::ostringstream os;
  os << "step,kind,plateau_id,s,l,concavity,branch,morse_index,c1,action_rat,action_pi,action_lambda,"
        "action_value_rat,action_value_pi,action_approx,index,verdict\n";
  for (const auto& row : cert.table) {
    const auto& o = row.orbit;
    os << row.step << ',';
    if (const auto* t = std::get_if<TrivialOrbit>(&o.kind)) {
      os << "trivial," << t->plateau_id << ",,,,," << t->morse_index << ',';
    } else {
      const auto& c = std::get<CircleOrbit>(o.kind);
      os << "circle,," << format_rational(c.circle.s_star) << ',' << c.circle.l << ',' << c.circle.concavity << ','
         << c.branch << ",,";
    }
    os << o.c1 << ',' << format_rational(o.action.base.rat()) << ',' << format_rational(o.action.base.pi()) << ','
       << format_rational(o.action.lambda_coeff) << ',' << format_rational(row.action.rat()) << ','
       << format_rational(row.action.pi()) << ',' << Json(round12(row.action.approx())).dump() << ',' << o.index
       << ',' << to_string(row.verdict) << '\n';
  }
  return os.str();
}

std::string certificate_markdown(const SpectralCertificate& cert) {
  std::ostringstream os;
  const auto& in = cert.input;
  os << "# Spectral killer certificate\n\n";
  os << "**Status:** " << to_string(cert.status) << "\n\n";
  os << "| parameter | value |\n|---|---|\n";
  os << "| n | " << in.model.n << " |\n";
  os << "| lambda | " << format_rational(in.model.lambda) << " |\n";
  os << "| N | " << in.model.chern_gen << " |\n";
  os << "| mode | " << mode_name(in.model.mode) << " |\n";
  os << "| r | " << format_rational(in.r) << " |\n";
  os << "| epsilon | " << format_rational(in.eps) << " |\n";
  os << "| E | " << in.E.to_string() << " |\n";
  os << "| tau | " << in.effective_tau().to_string() << " |\n";
  os << "| plateau | " << in.effective_plateau().to_string() << " |\n";
  if (cert.status == CertStatus::InvalidInput) {
    os << "\n## Violations\n\n";
    for (const auto& v : cert.violations) os << "- " << v << "\n";
    return os.str();
  }
  os << "| m | " << cert.chosen_m.to_string() << " (~" << Json(round12(cert.chosen_m.approx())).dump() << ") |\n";
  os << "\n## Argument\n\n";
  for (const auto& f : cert.frame) os << "- " << f << "\n";
  if (cert.offender) {
    os << "\n## Offender\n\nstep " << cert.offender->step << ", winding " << cert.offender->winding()
       << ", action " << cert.offender->action.to_string() << " (~"
       << Json(round12(cert.offender->action.approx())).dump() << ")\n";
  }
  os << "\n## Index-n orbit classes\n\n| step | kind | l | branch | c1 | action | ~action | verdict |\n"
        "|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : cert.table) {
    const bool circle = row.orbit.is_circle();
    os << "| " << row.step << " | " << (circle ? "circle" : "trivial") << " | "
       << (circle ? std::to_string(row.winding()) : std::string("-")) << " | "
       << (circle ? std::to_string(std::get<CircleOrbit>(row.orbit.kind).branch) : std::string("-")) << " | "
       << row.orbit.c1 << " | " << row.action.to_string() << " | " << Json(round12(row.action.approx())).dump()
       << " | " << to_string(row.verdict) << " |\n";
  }
  os << "\n## Family windows\n\n| step | admissible windings | enumerated in band | witnesses | excluded | "
        "exclusion verified |\n|---|---|---|---|---|---|\n";
  for (const auto& w : cert.windows) {
    os << "| " << w.step << " | " << w.admissible << " | " << w.in_band.size() << " | " << w.witnesses.size()
       << " | " << w.excluded << " | " << (w.exclusion_verified ? "yes" : "no") << " |\n";
  }
  return os.str();
}

}  // namespace specpb
