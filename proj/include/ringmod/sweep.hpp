#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringmod/geometry.hpp"
#include "ringmod/maps.hpp"

namespace ringmod {

/// Closed annulus k_inner <= |x| <= k_outer about the origin (k_inner = 0 is a
/// ball); every continuum of a sweep must have its vertices in it.
struct Compactum {
  double k_inner = 0.45;
  double k_outer = 0.9;

  bool contains(std::span<const double> x) const;
};

/// Random segments and circular arcs (in the x1-x2 plane) with vertices in K,
/// each of chordal diameter >= epsilon. Segments never cut through the hole.
std::vector<Continuum> lightness_battery(int n, const Compactum& k, double epsilon, int count,
                                         std::uint64_t seed, int samples = 33);

struct LightnessMember {
  RadialMapFamily family;
  int m = 1;
  std::string label;
};

struct LightnessOptions {
  double epsilon = 0.1;
  Compactum compactum;
  /// Accept members whose divergence integral converges (the collapse
  /// control); otherwise such members are refused.
  bool negative_control = false;
  /// Members are split across this many threads and merged in member order.
  int workers = 1;
  QuadratureConfig quad;
};

struct LightnessRow {
  std::string label;
  int m = 1;
  double min_image_diameter = 0.0;
  std::size_t argmin_continuum = 0;
};

struct LightnessReport {
  std::vector<LightnessRow> rows;
  /// min over (member, continuum) of h(f(C)).
  double minimum = 0.0;
  std::size_t argmin_row = 0;
  /// min over the battery of h(C).
  double min_continuum_diameter = 0.0;
};

/// Sweeps h(f(C)) over members and continua. Throws RefusalError when a member
/// fails the divergence precondition and the sweep is not a negative control.
LightnessReport lightness_sweep(const std::vector<LightnessMember>& members,
                                const std::vector<Continuum>& continua, const LightnessOptions& opts);

/// "label,m,min_h_image,argmin_continuum" rows with %.17g numbers.
std::string lightness_csv(const LightnessReport& report);

}  // namespace ringmod
