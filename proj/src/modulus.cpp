#include "ringmod/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ringmod/errors.hpp"

namespace ringmod {

const char* to_string(ModulusMethod m) {
  switch (m) {
    case ModulusMethod::exact: return "exact";
    case ModulusMethod::eta0_bound: return "eta0_bound";
    case ModulusMethod::lower_bound: return "lower_bound";
    case ModulusMethod::discrete: return "discrete";
  }
  return "?";
}

RingModulusResult ring_modulus_exact(int n, double p, double r1, double r2) {
  if (n < 2) throw InputError("ring_modulus_exact: n must be >= 2");
  if (!(p > n - 1) || !(p <= n)) throw InputError("ring_modulus_exact: require n-1 < p <= n");
  if (!(r1 > 0.0) || !(r2 > r1)) throw InputError("ring_modulus_exact: require 0 < r1 < r2");
  RingModulusResult out;
  out.method = ModulusMethod::exact;
  out.n = n;
  out.p = p;
  out.r1 = r1;
  out.r2 = r2;
  const double area = unit_sphere_area(n);
  if (std::isinf(r2)) {
    out.value = 0.0;
    return out;
  }
  if (p == n) {
    out.value = area / std::pow(std::log(r2 / r1), n - 1);
    return out;
  }
  // int t^{-beta} dt with beta = (n-1)/(p-1) > 1.
  const double beta = (n - 1.0) / (p - 1.0);
  const double length = (std::pow(r1, 1.0 - beta) - std::pow(r2, 1.0 - beta)) / (beta - 1.0);
  out.value = area * std::pow(length, 1.0 - p);
  return out;
}

Eta0Bound eta0_weighted_bound(const WeightField& q, std::span<const double> x0, double r1, double r2,
                              const QuadratureConfig& cfg) {
  const int n = q.dimension();
  if (static_cast<int>(x0.size()) != n) throw InputError("eta0_weighted_bound: dimension mismatch");
  if (!(r1 > 0.0) || !(r2 > r1) || std::isinf(r2)) throw InputError("eta0_weighted_bound: require 0 < r1 < r2 < inf");
  const ScalarFunction mean = spherical_mean_function(q, x0, cfg);
  const double root = 1.0 / (n - 1.0);
  const ScalarFunction integrand = [&](double r) {
    const double qr = mean(r);
    if (std::isinf(qr)) return 0.0;
    if (qr == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (r * std::pow(qr, root));
  };
  const Estimate j = radial_integral(integrand, r1, r2, cfg);
  Eta0Bound out;
  if (j.infinite) {
    out.J = std::numeric_limits<double>::infinity();
    out.bound = 0.0;
    return out;
  }
  out.J = j.value;
  if (out.J == 0.0) {
    out.bound = std::numeric_limits<double>::infinity();
    out.bound_infinite = true;
    return out;
  }
  out.bound = unit_sphere_area(n) / std::pow(out.J, n - 1);
  return out;
}

ScalarFunction eta0_function(const WeightField& q, std::span<const double> x0, const Eta0Bound& b,
                             const QuadratureConfig& cfg) {
  if (!(b.J > 0.0) || std::isinf(b.J)) throw ContractError("eta0_function: J must be finite and positive");
  const ScalarFunction mean = spherical_mean_function(q, x0, cfg);
  const double root = 1.0 / (q.dimension() - 1.0);
  const double J = b.J;
  return [mean, root, J](double r) {
    const double qr = mean(r);
    if (qr == 0.0 || std::isinf(qr)) return 0.0;
    return 1.0 / (J * r * std::pow(qr, root));
  };
}

Eta0Identity eta0_identity(const WeightField& q, std::span<const double> x0, double r1, double r2,
                           const QuadratureConfig& cfg) {
  const Eta0Bound b = eta0_weighted_bound(q, x0, r1, r2, cfg);
  if (b.bound_infinite || std::isinf(b.J)) throw ContractError("eta0_identity: degenerate J");
  const ScalarFunction eta = eta0_function(q, x0, b, cfg);
  const Estimate e = annulus_weighted_integral(q, x0, r1, r2, eta, q.dimension(), cfg);
  if (e.infinite) throw ContractError("eta0_identity: energy integral diverged");
  Eta0Identity out;
  out.bound = b.bound;
  out.energy = e.value;
  out.relative_error = std::abs(e.value - b.bound) / b.bound;
  return out;
}

double caraman_lower_bound(int n, double p, double a, double b, double b_np) {
  if (n < 2) throw InputError("caraman_lower_bound: n must be >= 2");
  if (p == n) throw InputError("caraman_lower_bound: undefined for p = n; use loewner_lower_bound");
  if (!(p > n - 1) || !(p < n)) throw InputError("caraman_lower_bound: require n-1 < p < n");
  if (!(a > 0.0) || !(b >= a)) throw InputError("caraman_lower_bound: require 0 < a <= b");
  if (!(b_np > 0.0)) throw InputError("caraman_lower_bound: b_np must be positive");
  const double e = n - p;
  return std::ldexp(b_np, n) / e * (std::pow(b, e) - std::pow(a, e));
}

namespace {

// Radius range swept by a polyline about `center`.
std::pair<double, double> radius_range(const Continuum& c, std::span<const double> center) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const auto& v = c.vertices();
  const std::size_t n = center.size();
  auto rel = [&](const ExtendedPoint& x) {
    Vec d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x.coords()[i] - center[i];
    return d;
  };
  for (const auto& x : v) {
    const double r = norm(rel(x));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const Vec a = rel(v[k]);
    const Vec b = rel(v[k + 1]);
    double ab = 0.0;
    double aa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ab += a[i] * (b[i] - a[i]);
      aa += (b[i] - a[i]) * (b[i] - a[i]);
    }
    const double t = std::clamp(-ab / aa, 0.0, 1.0);
    Vec m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = a[i] + t * (b[i] - a[i]);
    lo = std::min(lo, norm(m));
  }
  return {lo, hi};
}

}  // namespace

bool spheres_meet_both(const Continuum& e0, const Continuum& e1, std::span<const double> center,
                       double a, double b) {
  if (e0.dimension() != static_cast<int>(center.size()) || e1.dimension() != e0.dimension()) {
    throw InputError("spheres_meet_both: dimension mismatch");
  }
  if (!(a >= 0.0) || !(b > a)) throw InputError("spheres_meet_both: require 0 <= a < b");
  for (const Continuum* c : {&e0, &e1}) {
    const auto [lo, hi] = radius_range(*c, center);
    if (lo > a || hi < b) return false;
  }
  return true;
}

double loewner_lower_bound(int n, double p, double R, double diam_e, double diam_f, double C) {
  if (n < 2) throw InputError("loewner_lower_bound: n must be >= 2");
  if (!(R > 0.0)) throw InputError("loewner_lower_bound: R must be positive");
  if (!(diam_e >= 0.0) || !(diam_f >= 0.0)) throw InputError("loewner_lower_bound: diameters must be >= 0");
  if (!(C > 0.0)) throw InputError("loewner_lower_bound: C must be positive");
  return std::min(diam_e, diam_f) / (C * std::pow(R, 1.0 + p - n));
}

double minorization_bound(double m13, double m23, double m_cross, double p) {
  if (!(m13 >= 0.0) || !(m23 >= 0.0) || !(m_cross >= 0.0)) {
    throw InputError("minorization_bound: moduli must be >= 0");
  }
  return std::pow(3.0, -p) * std::min({m13, m23, m_cross});
}

double minorization_bound_ring(double m13, double m23, int n, double p, double r1, double r2,
                               double b_np) {
  return minorization_bound(m13, m23, caraman_lower_bound(n, p, r1, r2, b_np), p);
}

}  // namespace ringmod
