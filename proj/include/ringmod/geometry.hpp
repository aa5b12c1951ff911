#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ringmod/errors.hpp"

namespace ringmod {

using Vec = std::vector<double>;

double norm(std::span<const double> x);
double distance(std::span<const double> x, std::span<const double> y);

/// Point of the one-point compactification of R^n.
class ExtendedPoint {
 public:
  static ExtendedPoint finite(Vec coords);
  static ExtendedPoint infinity(int dimension);
  static ExtendedPoint origin(int dimension);
  /// Unit vector e_axis scaled by `scale`.
  static ExtendedPoint axis(int dimension, int axis, double scale = 1.0);

  bool is_infinite() const noexcept { return infinite_; }
  bool is_finite() const noexcept { return !infinite_; }
  int dimension() const noexcept { return dimension_; }

  /// Throws InputError for the point at infinity.
  const Vec& coords() const;
  double norm() const;

  bool operator==(const ExtendedPoint&) const = default;

 private:
  ExtendedPoint(bool infinite, int dimension, Vec coords);

  bool infinite_ = false;
  int dimension_ = 2;
  Vec coords_;
};

/// Open ring A(center, r1, r2) = { r1 < |y - center| < r2 }.
class Annulus {
 public:
  Annulus(ExtendedPoint center, double r1, double r2);

  const ExtendedPoint& center() const noexcept { return center_; }
  double inner_radius() const noexcept { return r1_; }
  double outer_radius() const noexcept { return r2_; }
  int dimension() const noexcept { return center_.dimension(); }
  bool contains(const ExtendedPoint& y) const;

 private:
  ExtendedPoint center_;
  double r1_;
  double r2_;
};

/// Connected polyline standing in for a continuum. Vertices are finite and
/// consecutive vertices distinct.
class Continuum {
 public:
  explicit Continuum(std::vector<ExtendedPoint> vertices);

  /// Straight segment from a to b sampled with `samples` vertices (>= 2).
  static Continuum segment(const Vec& a, const Vec& b, int samples = 2);
  /// Arc of the circle |x| = radius in the (x1, x2) plane, angles in radians.
  static Continuum arc(int dimension, double radius, double theta0, double theta1,
                       int samples);
  /// Image of a continuum under a map: consecutive duplicates are merged and a
  /// fully collapsed image is kept as a single-vertex (point) continuum.
  static Continuum image(std::vector<ExtendedPoint> vertices);

  const std::vector<ExtendedPoint>& vertices() const noexcept { return vertices_; }
  int dimension() const noexcept { return vertices_.front().dimension(); }
  std::size_t size() const noexcept { return vertices_.size(); }
  bool is_point() const noexcept { return vertices_.size() == 1; }

 private:
  struct Unchecked {};
  Continuum(std::vector<ExtendedPoint> vertices, Unchecked) : vertices_(std::move(vertices)) {}

  std::vector<ExtendedPoint> vertices_;
};

/// h(x, y): the chordal metric induced by stereographic projection.
double chordal_distance(const ExtendedPoint& x, const ExtendedPoint& y);

/// Max pairwise chordal distance over the supplied vertex set.
double chordal_diameter(std::span<const ExtendedPoint> points);
double chordal_diameter(const Continuum& c);

/// Max pairwise Euclidean distance; all points must be finite.
double euclidean_diameter(std::span<const ExtendedPoint> points);
double euclidean_diameter(const Continuum& c);

/// Continua as JSON: an array of coordinate arrays, one row per vertex.
std::string continuum_to_json(const Continuum& c);
Continuum continuum_from_json(const std::string& text);

}  // namespace ringmod
