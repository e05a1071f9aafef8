#include "specpb/certifier.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace specpb;

namespace {

const PiRational kPi = PiRational::pi_times(Rational(1));

Rational q(const char* text) { return parse_rational(text); }

CertificationInput scenario() {
  CertificationInput in;
  in.model.n = 1;
  in.model.lambda = Rational(-1);
  in.model.chern_gen = 1;
  in.r = q("0.35");
  in.eps = q("0.05");
  in.E = PiRational(q("0.4"));
  in.tau = PiRational(q("1e-6"));
  return in;
}

PiRational pi_sq(const Rational& x) { return kPi * (x * x); }

/// Closed-form action of the index-n class on corner family `step` (4..7)
/// with winding l, for N = 1.
PiRational family_action(const CertificationInput& in, const PiRational& m, const PiRational& plateau, int step,
                         std::int64_t l) {
  const PiRational nl(in.model.effective_lambda() * in.model.n);
  const int k = 8 - step;  // step 4 sits at r - 4 eps, step 7 at r - eps
  const PiRational slope = nl - pi_sq(in.r - in.eps * k);
  PiRational base;
  switch (step) {
    case 4: base = m; break;
    case 5:
    case 6: base = nl + plateau; break;
    default: base = PiRational(0); break;
  }
  return base + slope * Rational(l);
}

/// The slope of f on the pieces adjacent to corner `step`, from the node
/// values of the certification profile.
std::pair<PiRational, PiRational> corner_slopes(const CertificationInput& in, const PiRational& m,
                                                const PiRational& plateau, int step) {
  std::vector<Rational> s;
  for (int k = 4; k >= 1; --k) s.push_back((in.r - in.eps * k) * (in.r - in.eps * k) / 2);
  const std::vector<PiRational> v = {m, plateau, plateau, PiRational(0)};
  const std::size_t i = static_cast<std::size_t>(step - 4);
  const PiRational left = i == 0 ? PiRational(0) : (v[i] - v[i - 1]) / (s[i] - s[i - 1]);
  const PiRational right = i == 3 ? PiRational(0) : (v[i + 1] - v[i]) / (s[i + 1] - s[i]);
  return {left, right};
}

/// Nonzero windings l with 2 pi l strictly between the corner slopes, by
/// testing each integer in a generous range.
std::vector<std::int64_t> admissible(const std::pair<PiRational, PiRational>& slopes) {
  const PiRational lo = min(slopes.first, slopes.second), hi = max(slopes.first, slopes.second);
  std::vector<std::int64_t> out;
  for (std::int64_t l = -5000; l <= 5000; ++l) {
    const PiRational w = kPi * Rational(2 * l);
    if (l != 0 && lo < w && w < hi) out.push_back(l);
  }
  return out;
}

Verdict oracle_verdict(const PiRational& a, const PiRational& E, const PiRational& tau) {
  if (abs(a) <= tau) return Verdict::Zero;
  if (a < -tau) return Verdict::Negative;
  if (a > E) return Verdict::AboveE;
  return Verdict::ForbiddenInRange;
}

}  // namespace

TEST_CASE("precondition examples") {
  CHECK(check_preconditions(scenario()).empty());

  CertificationInput half = scenario();
  half.model.lambda = Rational(1);
  half.E = PiRational(q("0.5"));
  const auto v = check_preconditions(half);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("|lambda|/2") != std::string::npos);

  CertificationInput big = scenario();
  big.r = q("1");
  big.eps = q("0.1");
  big.E = PiRational(1);
  big.model.lambda = Rational(-10);
  const auto w = check_preconditions(big);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("pi r^2 <= E") != std::string::npos);

  CertificationInput wide = scenario();
  wide.eps = q("0.0875");
  CHECK_FALSE(check_preconditions(wide).empty());
}

TEST_CASE("choose_m for the scenario") {
  const PiRational spacing(Rational(1), q("9/400"));
  CHECK(inner_corner_spacing(scenario()) == spacing);
  CHECK(choose_m(scenario()) == spacing);
}

TEST_CASE("choose_m with positive lambda") {
  CertificationInput in = scenario();
  in.model.lambda = Rational(1);
  const PiRational spacing(Rational(1), q("-9/400"));
  CHECK(inner_corner_spacing(in) == spacing);
  CHECK(choose_m(in) == spacing);
}

TEST_CASE("choose_m with a huge h_max") {
  CertificationInput in = scenario();
  in.h_max = PiRational(1000000);
  const PiRational spacing = inner_corner_spacing(in);
  const PiRational m = choose_m(in);
  const PiRational threshold = in.h_max + pi_sq(in.r) + *in.tau;
  CHECK(m > threshold);
  CHECK(m - spacing <= threshold);
  // floor((10^6 + 0.1225 pi + 10^-6) / (1 + 9 pi / 400)) + 1, in double precision
  const double pi = 3.14159265358979323846;
  const double k = std::floor((1e6 + 0.1225 * pi + 1e-6) / (1 + 9 * pi / 400)) + 1;
  CHECK(m == spacing * Rational(static_cast<long>(k)));
}

TEST_CASE("classify boundaries") {
  const PiRational E(q("0.4")), tau(q("1e-6"));
  CHECK(classify(PiRational(0), E, tau) == Verdict::Zero);
  CHECK(classify(tau, E, tau) == Verdict::Zero);
  CHECK(classify(-tau, E, tau) == Verdict::Zero);
  CHECK(classify(PiRational(q("-0.001")), E, tau) == Verdict::Negative);
  CHECK(classify(E, E, tau) == Verdict::ForbiddenInRange);
  CHECK(classify(PiRational(q("0.4000001")), E, tau) == Verdict::AboveE);
  CHECK(classify(PiRational(q("0.01")), E, tau) == Verdict::ForbiddenInRange);
}

TEST_CASE("scenario certifies and every row matches its closed form") {
  const CertificationInput in = scenario();
  const SpectralCertificate cert = certify(in);
  REQUIRE(cert.status == CertStatus::Certified);
  CHECK_FALSE(cert.offender);
  const PiRational m = cert.chosen_m;
  const PiRational plateau = pi_sq(in.r) * Rational(-1);
  const PiRational E = in.E, tau = *in.tau;

  std::set<int> steps;
  for (const auto& row : cert.table) {
    steps.insert(row.step);
    CAPTURE(row.step);
    CHECK(row.orbit.index == in.model.n);
    CHECK(row.action == row.orbit.action.value(in.model));
    CHECK(row.verdict == oracle_verdict(row.action, E, tau));
    CHECK(row.verdict != Verdict::ForbiddenInRange);
    if (row.step >= 4) {
      CHECK(row.action == family_action(in, m, plateau, row.step, row.winding()));
    } else {
      const PiRational value = row.step == 1 ? m : row.step == 2 ? plateau : PiRational(0);
      CHECK(row.action == value - PiRational(in.model.lambda * row.orbit.c1));
      if (row.step == 1) CHECK(row.orbit.c1 == 0);
      if (row.step != 1) CHECK((row.orbit.c1 >= -in.model.n && row.orbit.c1 <= 0));
    }
  }
  CHECK(steps == std::set<int>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("every admissible winding of the scenario is covered by the windows") {
  const CertificationInput in = scenario();
  std::vector<FamilyWindow> windows;
  const PiRational m = choose_m(in);
  const PiRational plateau = pi_sq(in.r) * Rational(-1);
  const auto table = enumerate_index_n(in, m, &windows);
  const PiRational band_lo = -*in.tau, band_hi = in.E + *in.tau;

  for (int step = 4; step <= 7; ++step) {
    CAPTURE(step);
    const auto ls = admissible(corner_slopes(in, m, plateau, step));
    std::set<std::int64_t> listed;
    for (const auto& row : table) {
      if (row.step == step) listed.insert(row.winding());
    }
    const FamilyWindow* w = nullptr;
    for (const auto& fw : windows) {
      if (fw.step == step) w = &fw;
    }
    REQUIRE(w);
    CHECK(w->admissible == static_cast<std::int64_t>(ls.size()));
    CHECK(w->exclusion_verified);
    for (std::int64_t l : ls) {
      const PiRational a = family_action(in, m, plateau, step, l);
      CHECK(oracle_verdict(a, in.E, *in.tau) != Verdict::ForbiddenInRange);
      if (band_lo <= a && a <= band_hi) CHECK(listed.count(l) == 1);
    }
    for (std::int64_t l : listed) CHECK(std::find(ls.begin(), ls.end(), l) != ls.end());
  }
}

TEST_CASE("scenario table rows quoted as examples") {
  const CertificationInput in = scenario();
  const SpectralCertificate cert = certify(in);
  bool saw_step5 = false, saw_step3 = false, saw_step1 = false;
  for (const auto& row : cert.table) {
    if (row.step == 5 && row.winding() == -1) {
      saw_step5 = true;
      CHECK(row.action == pi_sq(in.r - in.eps * 3) - pi_sq(in.r));
      CHECK(row.verdict == Verdict::Negative);
    }
    if (row.step == 3 && row.orbit.c1 == 0) {
      saw_step3 = true;
      CHECK(row.verdict == Verdict::Zero);
    }
    if (row.step == 1) {
      saw_step1 = true;
      CHECK(row.action == cert.chosen_m);
      CHECK(row.verdict == Verdict::AboveE);
    }
  }
  CHECK(saw_step5);
  CHECK(saw_step3);
  CHECK(saw_step1);
}

TEST_CASE("aspherical mode certifies with a smaller table") {
  CertificationInput in = scenario();
  const std::size_t monotone_rows = certify(in).table.size();
  in.model.mode = ManifoldMode::Aspherical;
  const SpectralCertificate cert = certify(in);
  CHECK(cert.status == CertStatus::Certified);
  CHECK(cert.table.size() < monotone_rows);
  for (const auto& row : cert.table) CHECK(row.orbit.c1 == 0);
}

TEST_CASE("invalid input") {
  CertificationInput in = scenario();
  in.E = PiRational(q("0.3"));
  const SpectralCertificate cert = certify(in);
  CHECK(cert.status == CertStatus::InvalidInput);
  CHECK_FALSE(cert.violations.empty());
  CHECK(cert.table.empty());
}

TEST_CASE("probe examples") {
  const CertificationInput in = scenario();
  const SpectralCertificate refuted = probe_plateau(in, PiRational(q("-0.1")));
  REQUIRE(refuted.status == CertStatus::Refuted);
  REQUIRE(refuted.offender);
  CHECK(refuted.offender->step == 5);
  CHECK(refuted.offender->winding() == -1);
  CHECK(refuted.offender->action == pi_sq(q("0.2")) + PiRational(q("-0.1")));
  CHECK(refuted.offender->verdict == Verdict::ForbiddenInRange);

  CHECK(probe_plateau(in, pi_sq(in.r) * Rational(-1)).status == CertStatus::Certified);
  CHECK(probe_plateau(in, pi_sq(q("0.2")) * Rational(-1)).status == CertStatus::Certified);
  CHECK(probe_plateau(in, pi_sq(q("0.2")) * Rational(-1) - PiRational(q("0.01"))).status ==
        CertStatus::Certified);
  CHECK_THROWS_AS(probe_plateau(in, PiRational(q("0.1"))), InvalidParameter);
  CHECK_THROWS_AS(probe_plateau(in, PiRational(q("-0.5"))), InvalidParameter);
}

TEST_CASE("probe sweep agrees with the sign of pi (r - 3 eps)^2 + a") {
  const CertificationInput in = scenario();
  for (int k = 0; k <= 38; ++k) {
    const PiRational a(Rational(-k, 100));
    if (a < pi_sq(in.r) * Rational(-1)) break;
    const PiRational offender = pi_sq(in.r - in.eps * 3) + a;
    const bool forbidden = offender > *in.tau && offender <= in.E;
    CAPTURE(k);
    CHECK((probe_plateau(in, a).status == CertStatus::Refuted) == forbidden);
  }
}

TEST_CASE("window overflow") {
  CertificationInput in = scenario();
  in.plateau = PiRational(q("-0.1"));
  in.l_window = 0;
  CHECK_THROWS_AS(certify(in), WindowOverflow);
  in.l_window = 1;
  CHECK_NOTHROW(certify(in));
}

TEST_CASE("status is stable under other valid choices of m") {
  const CertificationInput base = scenario();
  const PiRational spacing = inner_corner_spacing(base);
  for (int k : {1, 2, 3, 7}) {
    CertificationInput in = base;
    in.m = spacing * Rational(k);
    CHECK(certify(in).status == CertStatus::Certified);
    CHECK(probe_plateau(in, PiRational(q("-0.1"))).status == CertStatus::Refuted);
  }
}

TEST_CASE("m override must clear the threshold") {
  CertificationInput in = scenario();
  in.m = PiRational(q("0.4"));
  CHECK(certify(in).status == CertStatus::InvalidInput);
}

TEST_CASE("certificates are byte-identical across runs") {
  const std::string a = to_json(certify(scenario())).dump();
  const std::string b = to_json(certify(scenario())).dump();
  CHECK(a == b);
  CHECK(certificate_csv(certify(scenario())) == certificate_csv(certify(scenario())));
  CHECK(certificate_markdown(certify(scenario())) == certificate_markdown(certify(scenario())));
}

TEST_CASE("certificate JSON shape") {
  const Json j = to_json(certify(scenario()));
  CHECK(j["status"] == "CERTIFIED");
  CHECK(j.contains("chosen_m"));
  CHECK(j.contains("parameters"));
  CHECK(j["table"].is_array());
  CHECK(j["table"][0].contains("verdict"));
  CHECK(j["table"][0].contains("step"));
}

TEST_CASE("shell spacings exceed E on random valid inputs") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> nd(1, 4), rd(1, 60), fd(1, 99), ed(0, 100), ld(1, 40);
  int valid = 0;
  for (int trial = 0; trial < 3000 && valid < 500; ++trial) {
    CertificationInput in;
    in.model.n = nd(rng);
    in.model.lambda = Rational(ld(rng), 4) * (trial % 2 == 0 ? 1 : -1);
    in.r = Rational(rd(rng), 100);
    in.eps = in.r * Rational(fd(rng), 400);
    const PiRational area = pi_sq(in.r);
    // E between pi r^2 and |lambda| / 2
    const PiRational top(abs(in.model.lambda) / 2);
    in.E = area + (top - area) * Rational(ed(rng), 101);
    in.tau = PiRational(Rational(1, 1000000000));
    if (!check_preconditions(in).empty()) continue;
    ++valid;
    const PiRational nl(in.model.lambda * in.model.n);
    for (int k = 1; k <= 4; ++k) CHECK(abs(nl - pi_sq(in.r - in.eps * k)) > in.E);
  }
  CHECK(valid >= 100);
}

TEST_CASE("random valid inputs certify and refute exactly as the closed forms predict") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> rd(5, 38), fd(4, 95), ad(0, 100);
  int runs = 0;
  for (int trial = 0; trial < 400 && runs < 60; ++trial) {
    CertificationInput in = scenario();
    in.r = Rational(rd(rng), 100);
    in.eps = in.r * Rational(fd(rng), 400);
    const PiRational area = pi_sq(in.r);
    if (area > in.E) continue;
    ++runs;
    CHECK(certify(in).status == CertStatus::Certified);
    const PiRational a = area * Rational(-ad(rng), 100);
    const PiRational offender = pi_sq(in.r - in.eps * 3) + a;
    // other families stay outside the band for plateaus in [-pi r^2, 0]
    const bool forbidden = offender > *in.tau && offender <= in.E;
    CHECK((probe_plateau(in, a).status == CertStatus::Refuted) == forbidden);
  }
  CHECK(runs >= 20);
}
