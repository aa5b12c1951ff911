#include "ringmod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace ringmod {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

ExtendedPoint::ExtendedPoint(bool infinite, int dimension, Vec coords)
    : infinite_(infinite), dimension_(dimension), coords_(std::move(coords)) {
  if (dimension_ < 2) throw InputError("ExtendedPoint: dimension must be >= 2");
  if (!infinite_ && static_cast<int>(coords_.size()) != dimension_) {
    throw InputError("ExtendedPoint: coordinate count differs from dimension");
  }
}

ExtendedPoint ExtendedPoint::finite(Vec coords) {
  const int n = static_cast<int>(coords.size());
  for (double v : coords) {
    if (!std::isfinite(v)) throw InputError("ExtendedPoint: non-finite coordinate");
  }
  return ExtendedPoint(false, n, std::move(coords));
}

ExtendedPoint ExtendedPoint::infinity(int dimension) { return ExtendedPoint(true, dimension, {}); }

ExtendedPoint ExtendedPoint::origin(int dimension) {
  return ExtendedPoint(false, dimension, Vec(static_cast<std::size_t>(std::max(dimension, 0)), 0.0));
}

ExtendedPoint ExtendedPoint::axis(int dimension, int axis, double scale) {
  if (axis < 0 || axis >= dimension) throw InputError("ExtendedPoint::axis: axis out of range");
  Vec v(static_cast<std::size_t>(dimension), 0.0);
  v[static_cast<std::size_t>(axis)] = scale;
  return ExtendedPoint(false, dimension, std::move(v));
}

const Vec& ExtendedPoint::coords() const {
  if (infinite_) throw InputError("ExtendedPoint: the point at infinity has no coordinates");
  return coords_;
}

double ExtendedPoint::norm() const {
  if (infinite_) return std::numeric_limits<double>::infinity();
  return ringmod::norm(coords_);
}

Annulus::Annulus(ExtendedPoint center, double r1, double r2)
    : center_(std::move(center)), r1_(r1), r2_(r2) {
  if (center_.is_infinite()) throw InputError("Annulus: center must be finite");
  if (!(r1_ > 0.0) || !(r2_ > r1_) || !std::isfinite(r2_)) {
    throw InputError("Annulus: require 0 < r1 < r2 < inf");
  }
}

bool Annulus::contains(const ExtendedPoint& y) const {
  if (y.is_infinite()) return false;
  const double d = distance(y.coords(), center_.coords());
  return d > r1_ && d < r2_;
}

Continuum::Continuum(std::vector<ExtendedPoint> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw InputError("Continuum: need at least 2 vertices");
  const int n = vertices_.front().dimension();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const auto& v = vertices_[i];
    if (v.is_infinite()) throw InputError("Continuum: vertices must be finite");
    if (v.dimension() != n) throw InputError("Continuum: mixed dimensions");
    if (i > 0 && v == vertices_[i - 1]) {
      throw InputError("Continuum: consecutive vertices must be distinct");
    }
  }
}

Continuum Continuum::segment(const Vec& a, const Vec& b, int samples) {
  if (samples < 2) throw InputError("Continuum::segment: need >= 2 samples");
  if (a.size() != b.size()) throw InputError("Continuum::segment: dimension mismatch");
  std::vector<ExtendedPoint> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i] + t * (b[i] - a[i]);
    pts.push_back(ExtendedPoint::finite(std::move(v)));
  }
  return Continuum(std::move(pts));
}

Continuum Continuum::arc(int dimension, double radius, double theta0, double theta1, int samples) {
  if (samples < 2) throw InputError("Continuum::arc: need >= 2 samples");
  std::vector<ExtendedPoint> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const double t = theta0 + (theta1 - theta0) * k / (samples - 1);
    Vec v(static_cast<std::size_t>(dimension), 0.0);
    v[0] = radius * std::cos(t);
    v[1] = radius * std::sin(t);
    pts.push_back(ExtendedPoint::finite(std::move(v)));
  }
  return Continuum(std::move(pts));
}

Continuum Continuum::image(std::vector<ExtendedPoint> vertices) {
  if (vertices.empty()) throw InputError("Continuum::image: no vertices");
  std::vector<ExtendedPoint> merged;
  merged.reserve(vertices.size());
  for (auto& v : vertices) {
    if (v.is_infinite()) throw InputError("Continuum::image: vertices must be finite");
    if (v.dimension() != vertices.front().dimension()) {
      throw InputError("Continuum::image: mixed dimensions");
    }
    if (merged.empty() || !(merged.back() == v)) merged.push_back(std::move(v));
  }
  return Continuum(std::move(merged), Unchecked{});
}

double chordal_distance(const ExtendedPoint& x, const ExtendedPoint& y) {
  if (x.dimension() != y.dimension()) throw InputError("chordal_distance: dimension mismatch");
  if (x.is_infinite() && y.is_infinite()) return 0.0;
  if (x.is_infinite()) return 1.0 / std::sqrt(1.0 + std::pow(y.norm(), 2));
  if (y.is_infinite()) return 1.0 / std::sqrt(1.0 + std::pow(x.norm(), 2));
  const double nx = x.norm();
  const double ny = y.norm();
  return distance(x.coords(), y.coords()) / (std::sqrt(1.0 + nx * nx) * std::sqrt(1.0 + ny * ny));
}

double chordal_diameter(std::span<const ExtendedPoint> points) {
  if (points.empty()) throw InputError("chordal_diameter: empty set");
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, chordal_distance(points[i], points[j]));
    }
  }
  return best;
}

double chordal_diameter(const Continuum& c) { return chordal_diameter(c.vertices()); }

double euclidean_diameter(std::span<const ExtendedPoint> points) {
  if (points.empty()) throw InputError("euclidean_diameter: empty set");
  for (const auto& p : points) {
    if (p.is_infinite()) throw InputError("euclidean_diameter: point at infinity");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, distance(points[i].coords(), points[j].coords()));
    }
  }
  return best;
}

double euclidean_diameter(const Continuum& c) { return euclidean_diameter(c.vertices()); }

std::string continuum_to_json(const Continuum& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& v : c.vertices()) rows.push_back(v.coords());
  return rows.dump();
}

Continuum continuum_from_json(const std::string& text) {
  nlohmann::json rows;
  try {
    rows = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("continuum_from_json: ") + e.what());
  }
  if (!rows.is_array()) throw InputError("continuum_from_json: expected an array of rows");
  std::vector<ExtendedPoint> pts;
  for (const auto& row : rows) {
    if (!row.is_array()) throw InputError("continuum_from_json: each row must be an array");
    Vec v;
    for (const auto& x : row) {
      if (!x.is_number()) throw InputError("continuum_from_json: non-numeric coordinate");
      v.push_back(x.get<double>());
    }
    pts.push_back(ExtendedPoint::finite(std::move(v)));
  }
  return Continuum(std::move(pts));
}

}  // namespace ringmod
