#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringmod/criteria.hpp"
#include "ringmod/geometry.hpp"
#include "ringmod/profile.hpp"
#include "ringmod/quadrature.hpp"

namespace ringmod {

enum class MapBranch { p_equals_n, p_general };
const char* to_string(MapBranch b);

struct ProfileGridConfig {
  /// Log-spaced table size for profiles without a closed form.
  int points = 4096;
  /// Smallest tabulated radius; below it the integral is evaluated on demand.
  double r_min = 1e-12;
};

/// Member index of a map family; `limit` selects the limit map.
struct MapIndex {
  static constexpr int limit = 0;
};

/// Radial stretch profile built from the spherical mean q(t) of the weight
/// at the origin, over the unit ball. With
///   G(r) = int_r^1 dt / (t^{(n-1)/(p-1)} q^{1/(p-1)}(t)),
/// the profile is rho(r) = exp(-G(r)) for p = n and
/// (1 + gamma G(r))^{-1/gamma}, gamma = (n-p)/(p-1), for p < n. A truncation m
/// replaces q by 1 on (0, 1/m].
class RadialProfile {
 public:
  static RadialProfile build(const QProfile& q, double p, int n, int truncation = MapIndex::limit,
                             const ProfileGridConfig& grid = {}, const QuadratureConfig& quad = {});

  double p() const noexcept;
  int dimension() const noexcept;
  MapBranch branch() const noexcept;
  int truncation() const noexcept { return m_; }
  bool closed_form() const noexcept;
  const QProfile& weight_profile() const noexcept;

  /// Same profile data with another truncation (shares the table).
  RadialProfile with_truncation(int m) const;

  /// int_r^1 of the profile integrand (untruncated), r in (0, 1].
  double G(double r) const;
  /// Solves G(r) = value for r in (0, 1].
  double G_inverse(double value) const;
  /// G(0+); +inf when the integral diverges.
  double G_at_zero() const;

  /// rho_m(r) on [0, 1]; rho(0) = rho(0+).
  double rho(double r) const;
  /// rho_m^{-1}(s) for s in [0, 1]; s <= rho(0+) maps to 0.
  double rho_inverse(double s) const;

  /// (r, rho(r)) on the tabulation grid (or a log grid for closed forms).
  std::vector<std::pair<double, double>> grid() const;

 private:
  struct Core;
  RadialProfile(std::shared_ptr<const Core> core, int m) : core_(std::move(core)), m_(m) {}
  double rho_from_G(double g) const;
  double G_from_rho(double s) const;

  std::shared_ptr<const Core> core_;
  int m_ = MapIndex::limit;
};

/// The indexed family f_m = g_m^{-1}, g_m(x) = (x/|x|) rho_m(|x|), and its
/// limit f. Members are selected by m >= 1 or MapIndex::limit.
class RadialMapFamily {
 public:
  explicit RadialMapFamily(RadialProfile profile);

  const RadialProfile& profile() const noexcept { return profile_; }
  MapBranch branch() const noexcept { return profile_.branch(); }
  int dimension() const noexcept { return profile_.dimension(); }

  /// I_m = G(1/m); I_0 for the limit.
  double I(int m) const;
  /// J_m = (1 + gamma I_m)^{-1/gamma} (p < n only).
  double J(int m) const;
  double I0() const { return I(MapIndex::limit); }
  double J0() const { return J(MapIndex::limit); }
  /// Radius below which f_m uses the inner branch: exp(-I_m) resp. J_m.
  double threshold(int m) const;

  /// f_m(x) for |x| < 1.
  Vec eval(int m, std::span<const double> x) const;
  /// g_m(x) for |x| < 1.
  Vec forward(int m, std::span<const double> x) const;

 private:
  RadialProfile profile_;
};

/// Vertex-wise image of a continuum under f_m.
Continuum pushforward(const RadialMapFamily& fam, int m, const Continuum& c);

struct CollapseRow {
  int m = 0;
  double image_diameter = 0.0;
  double ab_distance = 0.0;
};

struct CollapseReport {
  std::vector<CollapseRow> rows;
  /// min over m of h(f_m(a), f_m(b)).
  double realized_delta = 0.0;
  bool diameters_strictly_decreasing = false;
  /// First m from which h(f_m(a), f_m(b)) no longer changes; 0 if never.
  int ab_constant_from = 0;
  double collapse_radius = 0.0;
  DivergenceVerdict verdict;
};

/// Runs the collapse experiment: C inside the collapse ball of the limit map,
/// a and b in the ring where the maps eventually agree. Throws RefusalError
/// when the divergence integral is not certified convergent or the points are
/// misplaced.
CollapseReport collapse_experiment(const QProfile& q, double p, int n, const Continuum& c,
                                 const ExtendedPoint& a, const ExtendedPoint& b,
                                 const std::vector<int>& m_list, const ProfileGridConfig& grid = {},
                                 const QuadratureConfig& quad = {});

/// CSV "m,h_image_diam,h_ab" with %.17g numbers.
std::string collapse_csv(const CollapseReport& report);

/// Minimal standalone SVG of the decay curve on log-log axes.
std::string collapse_svg(const CollapseReport& report);

struct MapMember {
  RadialMapFamily family;
  int m = MapIndex::limit;
};

struct EquicontinuityOptions {
  /// Shells sampled inside each ball and directions per shell.
  int shells = 8;
  int directions = 64;
  std::uint64_t seed = 0x5eedULL;
};

/// For each radius r: sup over members and sampled x in B(x0, r) of
/// h(f(x), f(x0)). Points outside the unit ball are skipped.
std::vector<ProbePoint> equicontinuity_modulus(const std::vector<MapMember>& members,
                                               std::span<const double> x0,
                                               const std::vector<double>& radii,
                                               const EquicontinuityOptions& opts = {});

}  // namespace ringmod
