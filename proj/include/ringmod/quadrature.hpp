#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ringmod/geometry.hpp"
#include "ringmod/profile.hpp"

namespace ringmod {

/// Surface area of the unit sphere S^{n-1} in R^n (omega_{n-1}).
double unit_sphere_area(int n);
/// Volume of the unit ball in R^n (Omega_n).
double unit_ball_volume(int n);

struct QuadratureConfig {
  /// Gauss order per angular coordinate (n = 2, 3).
  int sphere_order = 32;
  /// Monte Carlo sample count on spheres and balls (n >= 4, FMO probes).
  int sphere_samples = 4096;
  /// Initial number of panels for adaptive radial integration.
  int radial_points = 4;
  std::uint64_t rng_seed = 0x5eedULL;
  double target_rel_tol = 1e-10;
  int max_subdivisions = 4000;
  /// Monte Carlo blocks may be evaluated on this many threads; results do not
  /// depend on it.
  int workers = 1;

  void validate() const;
};

/// Quadrature outcome. `infinite` distinguishes a divergent or +inf-valued
/// quantity from an ordinary float; `value` is +inf whenever it is set.
struct Estimate {
  double value = 0.0;
  double abs_error = 0.0;
  bool infinite = false;
  bool converged = true;
  int evaluations = 0;

  static Estimate infinity() {
    return {std::numeric_limits<double>::infinity(), 0.0, true, true, 0};
  }
};

using PointFunction = std::function<double(std::span<const double>)>;
using ScalarFunction = std::function<double(double)>;

/// Weight Q : R^n -> [0, inf], optionally radially symmetric about a center.
class WeightField {
 public:
  WeightField(int dimension, PointFunction evaluate);

  static WeightField constant(int dimension, double c);
  static WeightField radial(int dimension, Vec center, QProfile profile);

  double operator()(std::span<const double> x) const { return evaluate_(x); }
  int dimension() const noexcept { return dimension_; }
  bool is_radial() const noexcept { return profile_.has_value(); }
  const std::optional<QProfile>& radial_profile() const noexcept { return profile_; }
  const std::optional<Vec>& center() const noexcept { return center_; }

  /// Same pointwise weight, with the radial metadata dropped (forces sphere
  /// quadrature).
  WeightField without_profile() const;

  /// Max |Q(x) - q(|x - center|)| / max(1, |q|) over sampled points; 0 when not
  /// radial.
  double radial_consistency(int samples, double max_radius, std::uint64_t seed) const;

 private:
  int dimension_;
  PointFunction evaluate_;
  std::optional<QProfile> profile_;
  std::optional<Vec> center_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Unit-weight sphere rule: directions with weights summing to 1. Product
/// Gauss rule for n = 2, 3; seeded Monte Carlo for n >= 4.
struct SphereRule {
  int dimension = 2;
  std::vector<Vec> directions;
  std::vector<double> weights;
};
SphereRule sphere_rule(int n, const QuadratureConfig& cfg);

/// Mean of Q over the sphere S(x0, r).
Estimate sphere_average(const WeightField& q, std::span<const double> x0, double r,
                        const QuadratureConfig& cfg);

/// Adaptive Gauss-Kronrod integral of f over [a, b] with 0 <= a < b.
/// Integrable power-type endpoint singularities are removed by t = a + (b-a) s^k;
/// non-integrable ones (and refinement that never meets tolerance) come back
/// with `infinite` resp. `converged == false` set.
Estimate radial_integral(const ScalarFunction& f, double a, double b, const QuadratureConfig& cfg);

/// Spherical average q_{y0}(r) as a scalar function (uses the radial profile
/// when the weight is radial about y0).
ScalarFunction spherical_mean_function(const WeightField& q, std::span<const double> y0,
                                       const QuadratureConfig& cfg);

/// Integral over A(y0, eps, eps0) of Q(y) psi(|y - y0|)^p, by co-area reduction
/// omega_{n-1} int q_{y0}(r) psi^p(r) r^{n-1} dr.
Estimate annulus_weighted_integral(const WeightField& q, std::span<const double> y0, double eps,
                                   double eps0, const ScalarFunction& psi, double p,
                                   const QuadratureConfig& cfg);

/// Deterministic 64-bit seed derivation (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Uniform samples in the unit ball of R^n, generated in fixed blocks with
/// per-block seeds.
std::vector<Vec> unit_ball_samples(int n, int count, std::uint64_t seed);
/// Uniform directions on S^{n-1}, same block scheme.
std::vector<Vec> unit_sphere_samples(int n, int count, std::uint64_t seed);

}  // namespace ringmod
