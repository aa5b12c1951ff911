#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ringmod {

/// Scalar radial function r -> q(r) >= 0, typically the spherical average of a
/// weight about a fixed center. Constant and power profiles are recognized by
/// the map and modulus code, which then use closed forms instead of tables.
class QProfile {
 public:
  enum class Kind { constant, power, logarithmic, polynomial, custom };

  static QProfile constant(double c);
  /// q(r) = c * r^exponent.
  static QProfile power(double c, double exponent);
  /// q(r) = c * log(scale / r), positive for r < scale.
  static QProfile logarithmic(double c, double scale);
  /// q(r) = sum_k coeffs[k] * r^k.
  static QProfile polynomial(std::vector<double> coeffs);
  static QProfile custom(std::function<double(double)> f, std::string description);

  double operator()(double r) const { return f_(r); }

  Kind kind() const noexcept { return kind_; }
  /// c for constant/power/logarithmic profiles.
  double coefficient() const noexcept { return c_; }
  /// Power exponent (0 for constants).
  double exponent() const noexcept { return s_; }
  const std::string& description() const noexcept { return description_; }
  std::function<double(double)> function() const { return f_; }

 private:
  QProfile(Kind kind, double c, double s, std::function<double(double)> f, std::string description);

  Kind kind_;
  double c_ = 1.0;
  double s_ = 0.0;
  std::function<double(double)> f_;
  std::string description_;
};

}  // namespace ringmod
