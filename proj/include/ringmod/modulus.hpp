#pragma once

#include <span>
#include <string>

#include "ringmod/geometry.hpp"
#include "ringmod/quadrature.hpp"

namespace ringmod {

enum class ModulusMethod { exact, eta0_bound, lower_bound, discrete };
const char* to_string(ModulusMethod m);

struct RingModulusResult {
  double value = 0.0;
  ModulusMethod method = ModulusMethod::exact;
  int n = 2;
  double p = 2.0;
  double r1 = 0.0;
  double r2 = 0.0;
  std::string weight = "1";
};

/// p-modulus of the family joining the boundary spheres of A(0, r1, r2):
/// omega_{n-1} [int_{r1}^{r2} t^{-(n-1)/(p-1)} dt]^{1-p}, i.e.
/// omega_{n-1} / log^{n-1}(r2/r1) when p = n.
RingModulusResult ring_modulus_exact(int n, double p, double r1, double r2);

struct Eta0Bound {
  /// omega_{n-1} / J^{n-1}; +inf when J = 0.
  double bound = 0.0;
  /// J = int_{r1}^{r2} dr / (r q^{1/(n-1)}(r)); +inf when q vanishes on a set
  /// of positive length.
  double J = 0.0;
  bool bound_infinite = false;
};

/// Weighted ring bound with the extremal radial test function
/// eta0(r) = 1 / (J r q^{1/(n-1)}(r)), q the spherical mean of Q about x0.
Eta0Bound eta0_weighted_bound(const WeightField& q, std::span<const double> x0, double r1, double r2,
                              const QuadratureConfig& cfg);

/// The extremal test function for a computed bound (scalar in r).
ScalarFunction eta0_function(const WeightField& q, std::span<const double> x0, const Eta0Bound& b,
                             const QuadratureConfig& cfg);

struct Eta0Identity {
  double bound = 0.0;
  /// int_A Q eta0^n dm, computed by annulus_weighted_integral.
  double energy = 0.0;
  double relative_error = 0.0;
};

/// Evaluates both sides of int_A Q eta0^n dm = omega_{n-1} / J^{n-1} with
/// independent quadratures.
Eta0Identity eta0_identity(const WeightField& q, std::span<const double> x0, double r1, double r2,
                           const QuadratureConfig& cfg);

/// 2^n b_np / (n - p) (b^{n-p} - a^{n-p}) for n-1 < p < n. The constant b_np
/// is not known in closed form and must be supplied.
double caraman_lower_bound(int n, double p, double a, double b, double b_np = 1.0);

/// True when every sphere S(center, r), a < r < b, meets both polylines. Exact
/// for polylines: the radius along a connected polyline sweeps an interval
/// whose ends are the nearest point of some edge and the farthest vertex.
bool spheres_meet_both(const Continuum& e0, const Continuum& e1, std::span<const double> center,
                       double a, double b);

/// (1/C) min(diamE, diamF) / R^{1+p-n}. C is caller supplied; the value is
/// meaningful only up to that constant.
double loewner_lower_bound(int n, double p, double R, double diam_e, double diam_f, double C = 1.0);

/// 3^{-p} min{m13, m23, m_cross}.
double minorization_bound(double m13, double m23, double m_cross, double p);

/// Ring variant: m_cross replaced by the Caraman term for A(y0, r1, r2).
double minorization_bound_ring(double m13, double m23, int n, double p, double r1, double r2,
                               double b_np = 1.0);

}  // namespace ringmod
