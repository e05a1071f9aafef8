#include "specpb/exact.hpp"

#include <doctest.h>

#include <random>

using namespace specpb;

namespace {

// First 50 decimals of pi, truncated: P50 < pi < P50 + 10^-50.
Rational pi50() {
  return Rational(Integer("314159265358979323846264338327950288419716939937510"),
                  Integer("100000000000000000000000000000000000000000000000000"));
}

}  // namespace

TEST_CASE("decimal literals parse exactly") {
  CHECK(parse_rational("0.35") == Rational(7, 20));
  CHECK(parse_rational("0.05") == Rational(1, 20));
  CHECK(parse_rational("1e-6") == Rational(1, 1000000));
  CHECK(parse_rational("2.5E2") == Rational(250));
  CHECK(parse_rational("-0.1") == Rational(-1, 10));
  CHECK(parse_rational(".5") == Rational(1, 2));
  CHECK(parse_rational("+3") == Rational(3));
}

TEST_CASE("leading zeros are decimal, not octal") {
  CHECK(parse_rational("035") == Rational(35));
  CHECK(parse_rational("010") == Rational(10));
  CHECK(parse_rational("007/010") == Rational(7, 10));
  CHECK(parse_rational("0.0800") == Rational(2, 25));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(parse_rational("-000") == Rational(0));
}

TEST_CASE("fractions normalise") {
  CHECK(parse_rational("-2/4") == Rational(-1, 2));
  CHECK(parse_rational("6/-4") == Rational(-3, 2));
  CHECK(format_rational(Rational(-3, 2)) == "-3/2");
  CHECK(format_rational(Rational(4)) == "4/1");
}

TEST_CASE("malformed literals are rejected") {
  for (const char* bad : {"", "abc", "1/0", "1.2.3", "1e", "--1", "0x10", "1/2/3", " "}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rational(bad), InvalidParameter);
  }
}

TEST_CASE("round trip through format_rational") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> num(-100000, 100000), den(1, 100000);
  for (int i = 0; i < 500; ++i) {
    const Rational q(num(rng), den(rng));
    CHECK(parse_rational(format_rational(q)) == q);
  }
}

TEST_CASE("floor and ceil") {
  CHECK(floor(Rational(7, 2)) == 3);
  CHECK(floor(Rational(-7, 2)) == -4);
  CHECK(ceil(Rational(-7, 2)) == -3);
  CHECK(ceil(Rational(4)) == 4);
  CHECK(floor(Rational(-4)) == -4);
}

TEST_CASE("pi enclosures contain the known digits and are tight") {
  const Rational p = pi50();
  const Rational ulp(1, Integer("100000000000000000000000000000000000000000000000000"));
  for (unsigned digits : {1u, 5u, 12u, 30u, 45u}) {
    CAPTURE(digits);
    const PiEnclosure e = pi_enclosure(digits);
    CHECK(e.lo < p + ulp);
    CHECK(e.hi > p);
    CHECK(e.lo <= e.hi);
    Rational width = e.hi - e.lo;
    Rational tol(1);
    for (unsigned k = 0; k < digits; ++k) tol /= 10;
    CHECK(width < tol);
  }
}

TEST_CASE("signs of polynomials in pi") {
  CHECK(sign_of_pi_polynomial({{0, Rational(22, 7)}, {1, Rational(-1)}}) == 1);
  CHECK(sign_of_pi_polynomial({{0, Rational(355, 113)}, {1, Rational(-1)}}) == 1);
  CHECK(sign_of_pi_polynomial({{0, Rational(333, 106)}, {1, Rational(-1)}}) == -1);
  // pi^2 = 9.86960440108935861883...
  CHECK(sign_of_pi_polynomial({{2, Rational(1)}, {0, -parse_rational("9.8696044010")}}) == 1);
  CHECK(sign_of_pi_polynomial({{2, Rational(1)}, {0, -parse_rational("9.8696044011")}}) == -1);
  // 1/pi = 0.31830988618379067...
  CHECK(sign_of_pi_polynomial({{-1, Rational(1)}, {0, -parse_rational("0.318309886183790")}}) == 1);
  CHECK(sign_of_pi_polynomial({{-1, Rational(1)}, {0, -parse_rational("0.318309886183791")}}) == -1);
  CHECK(sign_of_pi_polynomial({}) == 0);
  CHECK(sign_of_pi_polynomial({{3, Rational(0)}}) == 0);
}

TEST_CASE("PiRational ordering matches numeric values") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 30);
  for (int i = 0; i < 400; ++i) {
    const PiRational a(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
    const PiRational b(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
    const double da = a.approx(), db = b.approx();
    if (std::abs(da - db) > 1e-9) CHECK((a < b) == (da < db));
    CHECK((a - b).sign() == -(b - a).sign());
  }
  CHECK(PiRational(Rational(0), Rational(1, 4)) > PiRational(Rational(785, 1000)));
  CHECK(PiRational(Rational(0), Rational(1, 4)) < PiRational(Rational(786, 1000)));
}

TEST_CASE("products leaving Q(pi) are rejected") {
  const PiRational pi = PiRational::pi_times(Rational(1));
  CHECK_THROWS(pi * pi);
  CHECK(PiRational(Rational(2)) * pi == PiRational::pi_times(Rational(2)));
  CHECK_THROWS(pi / Rational(0));
}

TEST_CASE("floor over two pi") {
  const PiRational two_pi = PiRational::pi_times(Rational(2));
  CHECK(floor_over_two_pi(two_pi) == 1);
  CHECK(floor_over_two_pi(two_pi - PiRational(Rational(1, 1000000))) == 0);
  CHECK(floor_over_two_pi(PiRational(Rational(-1, 1000))) == -1);
  CHECK(floor_over_two_pi(PiRational(Rational(0))) == 0);
  CHECK(floor_over_two_pi(PiRational(Rational(100))) == 15);  // 100 / 6.283 = 15.9
  CHECK(floor_over_two_pi(two_pi * Rational(-3)) == -3);
}

TEST_CASE("smallest multiple strictly above a threshold") {
  CHECK(smallest_multiple_above(PiRational(Rational(1)), PiRational(Rational(3))) == 4);
  CHECK(smallest_multiple_above(PiRational(Rational(1)), PiRational(Rational(5, 2))) == 3);
  CHECK(smallest_multiple_above(PiRational(Rational(1)), PiRational(Rational(-5))) == 1);
  const PiRational step(Rational(1), Rational(9, 400));  // 1.0706858...
  CHECK(smallest_multiple_above(step, PiRational(Rational(1000000))) == 933981);
  CHECK_THROWS_AS(smallest_multiple_above(PiRational(Rational(0)), PiRational(Rational(1))), InvalidParameter);
}
