#include "specpb/exact.hpp"

#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace specpb {

namespace bmp = boost::multiprecision;

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// cpp_int's string constructor reads a leading 0 as an octal prefix, so
// leading zeros are stripped before conversion.
Integer decimal_integer(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return 0;
  return Integer(std::string(digits.substr(first)));
}

Integer parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw InvalidParameter("not an integer: '" + std::string(s) + "'");
  Integer value = decimal_integer(s);
  return negative ? Integer(-value) : value;
}

Integer pow10(unsigned e) {
  Integer p = 1;
  for (unsigned i = 0; i < e; ++i) p *= 10;
  return p;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Bounds on 10^digits * arctan(1/x) from the alternating Gregory series.
// Positive terms are rounded down and negative terms up for the lower bound
// (and conversely for the upper); the lower bound stops on an odd term and
// the upper on an even one.
std::pair<Integer, Integer> arctan_inverse_bounds(unsigned x, const Integer& scale) {
  Integer lower_run = 0;
  Integer upper_run = 0;
  Integer lower = 0;
  Integer upper = 0;
  Integer power = x;
  const Integer x2 = Integer(x) * x;
  int extra = 0;
  for (unsigned k = 0;; ++k) {
    const Integer denom = power * (2 * k + 1);
    const Integer q = scale / denom;
    const Integer q_up = (q * denom == scale) ? q : Integer(q + 1);
    if (k % 2 == 0) {
      lower_run += q;
      upper_run += q_up;
      upper = upper_run;
    } else {
      lower_run -= q_up;
      upper_run -= q;
      lower = lower_run;
    }
    if (q == 0 && ++extra >= 2 && k % 2 == 1) break;
    power *= x2;
  }
  return {lower, upper};
}

PiEnclosure compute_pi_enclosure(unsigned digits) {
  // Three guard digits absorb the per-term rounding of both series.
  const Integer scale = pow10(digits + 3);
  const auto [a_lo, a_hi] = arctan_inverse_bounds(5, scale);
  const auto [b_lo, b_hi] = arctan_inverse_bounds(239, scale);
  const Rational s(scale);
  return {Rational(16 * a_lo - 4 * b_hi) / s, Rational(16 * a_hi - 4 * b_lo) / s};
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw InvalidParameter("empty numeric literal");
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const Integer num = parse_integer(trim(s.substr(0, slash)));
    const Integer den = parse_integer(trim(s.substr(slash + 1)));
    if (den == 0) throw InvalidParameter("zero denominator in '" + std::string(s) + "'");
    return Rational(num) / Rational(den);
  }

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string_view mantissa = s;
  long exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    const Integer exp_value = parse_integer(s.substr(e + 1));
    if (exp_value > 4096 || exp_value < -4096) {
      throw InvalidParameter("exponent out of range in '" + std::string(text) + "'");
    }
    exponent = exp_value.convert_to<long>();
  }
  std::string digits;
  std::size_t fraction_digits = 0;
  if (const auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    const auto int_part = mantissa.substr(0, dot);
    const auto frac_part = mantissa.substr(dot + 1);
    if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw InvalidParameter("malformed decimal '" + std::string(text) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    fraction_digits = frac_part.size();
  } else {
    if (!all_digits(mantissa)) throw InvalidParameter("malformed number '" + std::string(text) + "'");
    digits = std::string(mantissa);
  }
  Rational value{decimal_integer(digits)};
  exponent -= static_cast<long>(fraction_digits);
  if (exponent > 0) value *= Rational(pow10(static_cast<unsigned>(exponent)));
  if (exponent < 0) value /= Rational(pow10(static_cast<unsigned>(-exponent)));
  return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& q) {
  return bmp::numerator(q).str() + "/" + bmp::denominator(q).str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

Integer floor(const Rational& q) {
  const Integer num = bmp::numerator(q);
  const Integer den = bmp::denominator(q);
  Integer quot = num / den;
  if (quot * den != num && num < 0) quot -= 1;
  return quot;
}

Integer ceil(const Rational& q) { return -floor(-q); }

PiEnclosure pi_enclosure(unsigned digits) {
  static std::mutex mutex;
  static std::map<unsigned, PiEnclosure> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(digits);
  if (it == cache.end()) it = cache.emplace(digits, compute_pi_enclosure(digits)).first;
  return it->second;
}

int sign_of_pi_polynomial(const std::map<int, Rational>& coeffs) {
  std::map<int, Rational> poly;
  for (const auto& [k, c] : coeffs) {
    if (c != 0) poly[k] = c;
  }
  if (poly.empty()) return 0;
  if (poly.size() == 1) return poly.begin()->second > 0 ? 1 : -1;
  // Shift to nonnegative powers; multiplying by pi^s > 0 keeps the sign.
  const int shift = poly.begin()->first;
  for (unsigned digits = 24; digits <= (1u << 16); digits *= 2) {
    const PiEnclosure pi = pi_enclosure(digits);
    Rational lo = 0;
    Rational hi = 0;
    for (const auto& [k, c] : poly) {
      const int p = k - shift;
      Rational plo = 1;
      Rational phi = 1;
      for (int i = 0; i < p; ++i) {
        plo *= pi.lo;
        phi *= pi.hi;
      }
      if (c > 0) {
        lo += c * plo;
        hi += c * phi;
      } else {
        lo += c * phi;
        hi += c * plo;
      }
    }
    if (lo > 0) return 1;
    if (hi < 0) return -1;
  }
  throw std::runtime_error("sign_of_pi_polynomial: enclosure refinement did not separate from zero");
}

int PiRational::sign() const {
  if (pi_ == 0) return rat_ > 0 ? 1 : (rat_ < 0 ? -1 : 0);
  if (rat_ == 0) return pi_ > 0 ? 1 : -1;
  if ((rat_ > 0) == (pi_ > 0)) return rat_ > 0 ? 1 : -1;
  return sign_of_pi_polynomial({{0, rat_}, {1, pi_}});
}

double PiRational::approx() const { return to_double(rat_) + to_double(pi_) * std::numbers::pi; }

PiRational& PiRational::operator/=(const Rational& q) {
  if (q == 0) throw std::domain_error("PiRational: division by zero");
  rat_ /= q;
  pi_ /= q;
  return *this;
}

PiRational operator*(const PiRational& a, const PiRational& b) {
  if (a.pi_ != 0 && b.pi_ != 0) throw std::domain_error("PiRational: product has a pi^2 term");
  return {a.rat_ * b.rat_, a.rat_ * b.pi_ + a.pi_ * b.rat_};
}

std::strong_ordering operator<=>(const PiRational& a, const PiRational& b) {
  const int s = (a - b).sign();
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string PiRational::to_string() const {
  std::ostringstream os;
  if (pi_ == 0) {
    os << format_rational(rat_);
  } else if (rat_ == 0) {
    os << format_rational(pi_) << "*pi";
  } else {
    os << format_rational(rat_) << (pi_ > 0 ? " + " : " - ") << format_rational(pi_ > 0 ? pi_ : Rational(-pi_))
       << "*pi";
  }
  return os.str();
}

PiRational abs(const PiRational& x) { return x.sign() < 0 ? -x : x; }
const PiRational& max(const PiRational& a, const PiRational& b) { return (a < b) ? b : a; }
const PiRational& min(const PiRational& a, const PiRational& b) { return (b < a) ? b : a; }

std::int64_t floor_over_two_pi(const PiRational& x) {
  const double estimate = x.approx() / (2.0 * std::numbers::pi);
  if (!std::isfinite(estimate) || std::fabs(estimate) > 4e18) {
    throw std::overflow_error("floor_over_two_pi: value out of 64-bit range");
  }
  auto l = static_cast<std::int64_t>(std::floor(estimate));
  const auto two_pi_times = [](std::int64_t k) { return PiRational::pi_times(Rational(2 * k)); };
  while (x >= two_pi_times(l + 1)) ++l;
  while (x < two_pi_times(l)) --l;
  return l;
}

std::int64_t smallest_multiple_above(const PiRational& step, const PiRational& threshold) {
  if (step.sign() <= 0) throw InvalidParameter("smallest_multiple_above: step must be positive");
  double estimate = std::floor(threshold.approx() / step.approx()) + 1.0;
  if (!std::isfinite(estimate) || estimate > 4e18) {
    throw std::overflow_error("smallest_multiple_above: multiple out of 64-bit range");
  }
  auto k = std::max<std::int64_t>(1, static_cast<std::int64_t>(estimate));
  while (step * Rational(k) <= threshold) ++k;
  while (k > 1 && step * Rational(k - 1) > threshold) --k;
  return k;
}

}  // namespace specpb
