// JSON encodings shared by every report: exact rationals travel as "p/q"
// strings, elements of Q(pi) as {"rat": "p/q", "pi": "p/q"}.
#pragma once

#include "specpb/exact.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace specpb {

using Json = nlohmann::ordered_json;

inline Json rational_json(const Rational& q) { return format_rational(q); }

inline Json pi_rational_json(const PiRational& x) {
  return Json{{"rat", format_rational(x.rat())}, {"pi", format_rational(x.pi())}};
}

/// Accepts "p/q" or decimal strings, JSON integers, and JSON floats (read
/// through their shortest decimal representation).
Rational rational_from_json(const Json& j);

/// Accepts everything rational_from_json does, plus {"rat": ..., "pi": ...}
/// objects (either key may be omitted).
PiRational pi_rational_from_json(const Json& j);

/// Validation failure carrying one "path: message" entry per problem.
class FieldErrors : public InvalidParameter {
public:
  explicit FieldErrors(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

private:
  std::vector<std::string> errors_;
};

/// Rounds to 12 significant digits so reports are byte-stable.
double round12(double x);

}  // namespace specpb
