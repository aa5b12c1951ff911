#include "ringmod/profile.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "ringmod/errors.hpp"

namespace ringmod {
namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

QProfile::QProfile(Kind kind, double c, double s, std::function<double(double)> f,
                   std::string description)
    : kind_(kind), c_(c), s_(s), f_(std::move(f)), description_(std::move(description)) {}

QProfile QProfile::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("QProfile::constant: need finite c >= 0");
  return QProfile(Kind::constant, c, 0.0, [c](double) { return c; },
                  "constant(" + format_number(c) + ")");
}

QProfile QProfile::power(double c, double exponent) {
  if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(exponent)) {
    throw InputError("QProfile::power: need finite c > 0 and finite exponent");
  }
  if (exponent == 0.0) {
    auto q = constant(c);
    return q;
  }
  return QProfile(Kind::power, c, exponent, [c, exponent](double r) { return c * std::pow(r, exponent); },
                  "power(" + format_number(c) + "," + format_number(exponent) + ")");
}

QProfile QProfile::logarithmic(double c, double scale) {
  if (!(c > 0.0) || !(scale > 0.0)) throw InputError("QProfile::logarithmic: need c > 0, scale > 0");
  return QProfile(Kind::logarithmic, c, 0.0, [c, scale](double r) { return c * std::log(scale / r); },
                  "log(" + format_number(c) + "," + format_number(scale) + ")");
}

QProfile QProfile::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InputError("QProfile::polynomial: no coefficients");
  std::string desc = "polynomial(";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k) desc += ",";
    desc += format_number(coeffs[k]);
  }
  desc += ")";
  return QProfile(Kind::polynomial, 1.0, 0.0,
                  [coeffs = std::move(coeffs)](double r) {
                    double acc = 0.0;
                    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
                    return acc;
                  },
                  desc);
}

QProfile QProfile::custom(std::function<double(double)> f, std::string description) {
  if (!f) throw InputError("QProfile::custom: empty callback");
  return QProfile(Kind::custom, 1.0, 0.0, std::move(f), std::move(description));
}

}  // namespace ringmod
