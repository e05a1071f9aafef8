#include "specpb/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace specpb {

FieldErrors::FieldErrors(std::vector<std::string> errors)
    : InvalidParameter([&] {
        std::string msg;
        for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_unsigned()) return Rational(Integer(j.get<unsigned long long>()));
  if (j.is_number_float()) return parse_rational(j.dump());
  throw InvalidParameter("expected a number or numeric string, got " + std::string(j.type_name()));
}

PiRational pi_rational_from_json(const Json& j) {
  if (j.is_object()) {
    for (const auto& [key, _] : j.items()) {
      if (key != "rat" && key != "pi") throw InvalidParameter("unexpected key '" + key + "' in exact value");
    }
    Rational rat = j.contains("rat") ? rational_from_json(j.at("rat")) : Rational(0);
    Rational pi = j.contains("pi") ? rational_from_json(j.at("pi")) : Rational(0);
    return {std::move(rat), std::move(pi)};
  }
  return PiRational(rational_from_json(j));
}

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12g", x);
  return std::strtod(buffer, nullptr);
}

}  // namespace specpb
