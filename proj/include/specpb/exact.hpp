// Exact arithmetic over Q and Q(pi).
//
// Every quantity that enters a certificate verdict (radii, plateau values,
// monotonicity constants, actions) has the form a + b*pi with a, b rational.
// Signs of such numbers are decided exactly by refining rigorous rational
// enclosures of pi, so comparisons never depend on floating point.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace specpb {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Raised when an input violates an operation's precondition.
class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "p/q", integers, and decimal/scientific literals ("0.35", "1e-6")
/// into an exact rational.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; the denominator is always printed.
std::string format_rational(const Rational& q);

double to_double(const Rational& q);

Integer floor(const Rational& q);
Integer ceil(const Rational& q);

/// Rational enclosure lo <= pi <= hi with hi - lo < 10^-digits.
struct PiEnclosure {
  Rational lo;
  Rational hi;
};
PiEnclosure pi_enclosure(unsigned digits);

/// Sign of sum_k coeffs[k] * pi^k (k may be negative).  Exact: pi is
/// transcendental, so a nonzero polynomial never vanishes at pi and the
/// enclosure refinement always terminates.
int sign_of_pi_polynomial(const std::map<int, Rational>& coeffs);

/// a + b*pi with a, b rational.
class PiRational {
public:
  PiRational() = default;
  PiRational(Rational rat, Rational pi = Rational(0)) : rat_(std::move(rat)), pi_(std::move(pi)) {}
  PiRational(int value) : rat_(value) {}

  static PiRational pi_times(Rational q) { return PiRational(Rational(0), std::move(q)); }

  const Rational& rat() const { return rat_; }
  const Rational& pi() const { return pi_; }

  bool is_rational() const { return pi_ == 0; }
  bool is_zero() const { return rat_ == 0 && pi_ == 0; }
  int sign() const;
  double approx() const;

  PiRational operator-() const { return {-rat_, -pi_}; }
  PiRational& operator+=(const PiRational& o) {
    rat_ += o.rat_;
    pi_ += o.pi_;
    return *this;
  }
  PiRational& operator-=(const PiRational& o) {
    rat_ -= o.rat_;
    pi_ -= o.pi_;
    return *this;
  }
  PiRational& operator*=(const Rational& q) {
    rat_ *= q;
    pi_ *= q;
    return *this;
  }
  PiRational& operator/=(const Rational& q);

  friend PiRational operator+(PiRational a, const PiRational& b) { return a += b; }
  friend PiRational operator-(PiRational a, const PiRational& b) { return a -= b; }
  friend PiRational operator*(PiRational a, const Rational& q) { return a *= q; }
  friend PiRational operator*(const Rational& q, PiRational a) { return a *= q; }
  friend PiRational operator/(PiRational a, const Rational& q) { return a /= q; }
  /// Product; throws if both factors carry a pi part (pi^2 leaves the field).
  friend PiRational operator*(const PiRational& a, const PiRational& b);

  friend bool operator==(const PiRational& a, const PiRational& b) {
    return a.rat_ == b.rat_ && a.pi_ == b.pi_;
  }
  friend std::strong_ordering operator<=>(const PiRational& a, const PiRational& b);

  std::string to_string() const;

private:
  Rational rat_{0};
  Rational pi_{0};
};

PiRational abs(const PiRational& x);
const PiRational& max(const PiRational& a, const PiRational& b);
const PiRational& min(const PiRational& a, const PiRational& b);

/// floor(x / (2*pi)), exact.
std::int64_t floor_over_two_pi(const PiRational& x);

/// Smallest integer k >= 1 such that k * step > threshold (step > 0).
std::int64_t smallest_multiple_above(const PiRational& step, const PiRational& threshold);

}  // namespace specpb
