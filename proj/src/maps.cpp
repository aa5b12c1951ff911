#include "ringmod/maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "ringmod/errors.hpp"

namespace ringmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cubic Hermite basis on [0, 1].
double hermite(double y0, double y1, double d0, double d1, double h, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

double hermite_slope(double y0, double y1, double d0, double d1, double h, double t) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * y1 +
          (3 * t2 - 2 * t) * h * d1) / h;
}

}  // namespace

const char* to_string(MapBranch b) {
  return b == MapBranch::p_equals_n ? "p_equals_n" : "p_general";
}

struct RadialProfile::Core {
  QProfile q = QProfile::constant(1.0);
  double p = 2.0;
  int n = 2;
  double beta = 1.0;
  double kappa = 1.0;
  double gamma = 0.0;
  MapBranch branch = MapBranch::p_equals_n;

  // Closed form G(r) = scale (1 - r^{e1}) / e1, or scale log(1/r) when e1 = 0.
  bool closed = false;
  double scale = 1.0;
  double e1 = 0.0;

  // Table: x = log r ascending, y = G decreasing, d = dG/dx.
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> d;
  double r_min = 1e-12;
  QuadratureConfig quad;
  ScalarFunction integrand;
  double g0 = kInf;

  double table_eval(double lx) const {
    const auto it = std::upper_bound(x.begin(), x.end(), lx);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin() - 1, 0));
    k = std::min(k, x.size() - 2);
    const double h = x[k + 1] - x[k];
    const double t = std::clamp((lx - x[k]) / h, 0.0, 1.0);
    return hermite(y[k], y[k + 1], d[k], d[k + 1], h, t);
  }

  // Solves table_eval(lx) = v for v in [y.back(), y.front()].
  double table_inverse(double v) const {
    // y is decreasing: find k with y[k] >= v >= y[k+1].
    std::size_t lo = 0;
    std::size_t hi = y.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (y[mid] >= v) lo = mid; else hi = mid;
    }
    const std::size_t k = lo;
    const double h = x[k + 1] - x[k];
    double a = 0.0;
    double b = 1.0;
    double t = y[k] == y[k + 1] ? 0.0 : (y[k] - v) / (y[k] - y[k + 1]);
    for (int it = 0; it < 100; ++it) {
      const double f = hermite(y[k], y[k + 1], d[k], d[k + 1], h, t) - v;
      if (f == 0.0) break;
      if (f > 0.0) a = t; else b = t;
      const double df = hermite_slope(y[k], y[k + 1], d[k], d[k + 1], h, t) * h;
      double next = df < 0.0 ? t - f / df : 0.5 * (a + b);
      if (!(next >= a && next <= b)) next = 0.5 * (a + b);
      if (std::abs(next - t) <= 1e-17 || b - a <= 1e-17) {
        t = next;
        break;
      }
      t = next;
    }
    return x[k] + t * h;
  }

  double G(double r) const {
    if (r >= 1.0) return 0.0;
    if (r <= 0.0) return g0;
    if (closed) return e1 == 0.0 ? scale * std::log(1.0 / r) : scale * (1.0 - std::pow(r, e1)) / e1;
    if (r >= r_min) return table_eval(std::log(r));
    const Estimate e = radial_integral(integrand, r, r_min, quad);
    return e.infinite ? kInf : y.front() + e.value;
  }

  double G_inverse(double v) const {
    if (v <= 0.0) return 1.0;
    if (v >= g0) return 0.0;
    if (closed) {
      if (e1 == 0.0) return std::exp(-v / scale);
      const double base = 1.0 - v * e1 / scale;
      if (base <= 0.0) return 0.0;
      return std::pow(base, 1.0 / e1);
    }
    if (v <= y.front()) return std::exp(table_inverse(v));
    // Below the table: bisection in log r on the on-demand integral.
    double lo = -745.0;
    double hi = x.front();
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(lo); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (G(std::exp(mid)) > v) lo = mid; else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
  }
};

RadialProfile RadialProfile::build(const QProfile& q, double p, int n, int truncation,
                                   const ProfileGridConfig& grid, const QuadratureConfig& quad) {
  if (n < 2) throw InputError("build_profile: n must be >= 2");
  if (!(p > n - 1) || !(p <= n)) throw InputError("build_profile: require n-1 < p <= n");
  if (truncation < 0) throw InputError("build_profile: truncation must be >= 1 or the limit");
  if (grid.points < 16 || !(grid.r_min > 0.0) || !(grid.r_min < 0.5)) {
    throw InputError("build_profile: invalid grid configuration");
  }
  quad.validate();
  auto core = std::make_shared<Core>();
  core->q = q;
  core->p = p;
  core->n = n;
  core->beta = (n - 1.0) / (p - 1.0);
  core->kappa = 1.0 / (p - 1.0);
  core->gamma = (n - p) / (p - 1.0);
  core->branch = p == n ? MapBranch::p_equals_n : MapBranch::p_general;
  core->r_min = grid.r_min;
  core->quad = quad;
  const double beta = core->beta;
  const double kappa = core->kappa;
  const ScalarFunction qf = q.function();
  core->integrand = [qf, beta, kappa](double t) {
    const double qt = qf(t);
    if (std::isnan(qt) || qt < 0.0) throw DomainError("build_profile: weight profile must be >= 0");
    if (qt == 0.0) return kInf;
    return 1.0 / (std::pow(t, beta) * std::pow(qt, kappa));
  };

  if (q.kind() == QProfile::Kind::constant || q.kind() == QProfile::Kind::power) {
    if (!(q.coefficient() > 0.0)) throw DomainError("build_profile: degenerate profile (q vanishes)");
    core->closed = true;
    core->scale = std::pow(q.coefficient(), -kappa);
    // Integrand scale * t^{e}, e = -(beta + s kappa).
    core->e1 = 1.0 - (beta + q.exponent() * kappa);
    core->g0 = core->e1 > 0.0 ? core->scale / core->e1 : kInf;
    return RadialProfile(std::move(core), truncation);
  }

  const int N = grid.points;
  const double lmin = std::log(grid.r_min);
  core->x.resize(static_cast<std::size_t>(N));
  core->y.assign(static_cast<std::size_t>(N), 0.0);
  core->d.assign(static_cast<std::size_t>(N), 0.0);
  for (int k = 0; k < N; ++k) core->x[static_cast<std::size_t>(k)] = lmin * (1.0 - static_cast<double>(k) / (N - 1));
  core->x.back() = 0.0;
  for (int k = N - 2; k >= 0; --k) {
    const std::size_t i = static_cast<std::size_t>(k);
    const Estimate e = radial_integral(core->integrand, std::exp(core->x[i]), std::exp(core->x[i + 1]), quad);
    if (e.infinite) throw DomainError("build_profile: degenerate profile (q vanishes on an interval)");
    core->y[i] = core->y[i + 1] + e.value;
  }
  // Exact slopes dG/d(log r) = -r g(r), limited to keep the cubic monotone.
  for (std::size_t i = 0; i < core->x.size(); ++i) {
    const double r = std::exp(core->x[i]);
    double s = -r * core->integrand(r);
    if (!std::isfinite(s)) {
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = std::min(i + 1, core->x.size() - 1);
      s = (core->y[b] - core->y[a]) / (core->x[b] - core->x[a]);
    }
    core->d[i] = std::min(s, 0.0);
  }
  for (std::size_t i = 0; i + 1 < core->x.size(); ++i) {
    const double secant = (core->y[i + 1] - core->y[i]) / (core->x[i + 1] - core->x[i]);
    if (secant == 0.0) {
      core->d[i] = core->d[i + 1] = 0.0;
      continue;
    }
    const double a = core->d[i] / secant;
    const double b = core->d[i + 1] / secant;
    const double norm2 = a * a + b * b;
    if (norm2 > 9.0) {
      const double tau = 3.0 / std::sqrt(norm2);
      core->d[i] = tau * a * secant;
      core->d[i + 1] = tau * b * secant;
    }
  }
  const Estimate tail = radial_integral(core->integrand, 0.0, grid.r_min, quad);
  core->g0 = tail.infinite ? kInf : core->y.front() + tail.value;
  return RadialProfile(std::move(core), truncation);
}

double RadialProfile::p() const noexcept { return core_->p; }
int RadialProfile::dimension() const noexcept { return core_->n; }
MapBranch RadialProfile::branch() const noexcept { return core_->branch; }
bool RadialProfile::closed_form() const noexcept { return core_->closed; }
const QProfile& RadialProfile::weight_profile() const noexcept { return core_->q; }

RadialProfile RadialProfile::with_truncation(int m) const {
  if (m < 0) throw InputError("with_truncation: m must be >= 1 or the limit");
  return RadialProfile(core_, m);
}

double RadialProfile::G(double r) const {
  if (r > 1.0 || std::isnan(r)) throw DomainError("RadialProfile::G: r must lie in (0, 1]");
  return core_->G(r);
}

double RadialProfile::G_inverse(double value) const { return core_->G_inverse(value); }

double RadialProfile::G_at_zero() const { return core_->g0; }

double RadialProfile::rho_from_G(double g) const {
  if (std::isinf(g)) return 0.0;
  if (core_->branch == MapBranch::p_equals_n) return std::exp(-g);
  return std::pow(1.0 + core_->gamma * g, -1.0 / core_->gamma);
}

double RadialProfile::G_from_rho(double s) const {
  if (s <= 0.0) return kInf;
  if (core_->branch == MapBranch::p_equals_n) return -std::log(s);
  return (std::pow(s, -core_->gamma) - 1.0) / core_->gamma;
}

double RadialProfile::rho(double r) const {
  if (!(r >= 0.0) || r > 1.0) throw DomainError("RadialProfile::rho: r must lie in [0, 1]");
  if (m_ != MapIndex::limit && r <= 1.0 / m_) {
    if (r == 0.0) return 0.0;
    const double im = core_->G(1.0 / m_);
    if (core_->branch == MapBranch::p_equals_n) return m_ * r * std::exp(-im);
    const double g = core_->gamma;
    return std::pow(1.0 + std::pow(r, -g) - std::pow(static_cast<double>(m_), g) + g * im, -1.0 / g);
  }
  if (r == 0.0) return rho_from_G(core_->g0);
  return rho_from_G(core_->G(r));
}

double RadialProfile::rho_inverse(double s) const {
  if (!(s >= 0.0) || s > 1.0) throw DomainError("RadialProfile::rho_inverse: s must lie in [0, 1]");
  if (m_ != MapIndex::limit) {
    const double im = core_->G(1.0 / m_);
    const double seam = rho_from_G(im);
    if (s < seam) {
      if (s == 0.0) return 0.0;
      if (core_->branch == MapBranch::p_equals_n) return s * std::exp(im) / m_;
      const double g = core_->gamma;
      return std::pow(std::pow(s, -g) - 1.0 + std::pow(static_cast<double>(m_), g) - g * im, -1.0 / g);
    }
  } else if (s <= rho_from_G(core_->g0)) {
    return 0.0;
  }
  return core_->G_inverse(G_from_rho(s));
}

std::vector<std::pair<double, double>> RadialProfile::grid() const {
  std::vector<std::pair<double, double>> out;
  if (!core_->closed) {
    for (double lx : core_->x) {
      const double r = std::exp(lx);
      out.emplace_back(r, rho(r));
    }
    return out;
  }
  const int N = 4096;
  const double lmin = std::log(1e-12);
  for (int k = 0; k < N; ++k) {
    const double r = k == N - 1 ? 1.0 : std::exp(lmin * (1.0 - static_cast<double>(k) / (N - 1)));
    out.emplace_back(r, rho(r));
  }
  return out;
}

RadialMapFamily::RadialMapFamily(RadialProfile profile) : profile_(std::move(profile)) {}

double RadialMapFamily::I(int m) const {
  if (m < 0) throw InputError("RadialMapFamily::I: m must be >= 1 or the limit");
  return m == MapIndex::limit ? profile_.G_at_zero() : profile_.G(1.0 / m);
}

double RadialMapFamily::J(int m) const {
  if (branch() != MapBranch::p_general) throw InputError("RadialMapFamily::J: defined for p < n only");
  return threshold(m);
}

double RadialMapFamily::threshold(int m) const {
  const double im = I(m);
  if (std::isinf(im)) return 0.0;
  if (branch() == MapBranch::p_equals_n) return std::exp(-im);
  const double g = (dimension() - profile_.p()) / (profile_.p() - 1.0);
  return std::pow(1.0 + g * im, -1.0 / g);
}

namespace {

double checked_radius(std::span<const double> x, int n, const char* who) {
  if (static_cast<int>(x.size()) != n) throw InputError(std::string(who) + ": dimension mismatch");
  const double r = norm(x);
  if (!(r < 1.0)) throw DomainError(std::string(who) + ": point must lie in the open unit ball");
  return r;
}

}  // namespace

Vec RadialMapFamily::eval(int m, std::span<const double> x) const {
  const double r = checked_radius(x, dimension(), "eval_map");
  Vec out(x.begin(), x.end());
  if (r == 0.0) return out;
  const double factor = profile_.with_truncation(m).rho_inverse(r) / r;
  for (double& c : out) c *= factor;
  return out;
}

Vec RadialMapFamily::forward(int m, std::span<const double> x) const {
  const double r = checked_radius(x, dimension(), "forward_map");
  Vec out(x.begin(), x.end());
  if (r == 0.0) return out;
  const double factor = profile_.with_truncation(m).rho(r) / r;
  for (double& c : out) c *= factor;
  return out;
}

Continuum pushforward(const RadialMapFamily& fam, int m, const Continuum& c) {
  std::vector<ExtendedPoint> image;
  image.reserve(c.size());
  for (const ExtendedPoint& v : c.vertices()) {
    if (v.is_infinite()) throw DomainError("pushforward: vertex at infinity");
    image.push_back(ExtendedPoint::finite(fam.eval(m, v.coords())));
  }
  return Continuum::image(std::move(image));
}

CollapseReport collapse_experiment(const QProfile& q, double p, int n, const Continuum& c,
                                 const ExtendedPoint& a, const ExtendedPoint& b,
                                 const std::vector<int>& m_list, const ProfileGridConfig& grid,
                                 const QuadratureConfig& quad) {
  if (m_list.empty()) throw InputError("collapse_experiment: empty m_list");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 1 || (i > 0 && m_list[i] <= m_list[i - 1])) {
      throw InputError("collapse_experiment: m_list must be increasing positive integers");
    }
  }
  if (c.dimension() != n || a.dimension() != n || b.dimension() != n) {
    throw InputError("collapse_experiment: dimension mismatch");
  }
  CollapseReport report;
  report.verdict = divergence_test(q.function(), p, n, 1.0, quad);
  if (report.verdict.verdict != Verdict::converges) {
    throw RefusalError(std::string("collapse_experiment: divergence integral over (0, 1) is ") +
                       to_string(report.verdict.verdict) + "; the construction needs it finite");
  }
  const RadialMapFamily fam(RadialProfile::build(q, p, n, MapIndex::limit, grid, quad));
  report.collapse_radius = fam.threshold(MapIndex::limit);
  if (!(report.collapse_radius > 0.0)) {
    throw RefusalError("collapse_experiment: collapse radius is zero (integral not finite)");
  }
  for (const ExtendedPoint& v : c.vertices()) {
    if (!(v.norm() < report.collapse_radius)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "collapse_experiment: continuum vertex at radius %.17g outside collapse ball %.17g",
                    v.norm(), report.collapse_radius);
      throw RefusalError(buf);
    }
  }
  for (const ExtendedPoint* pt : {&a, &b}) {
    if (pt->is_infinite() || !(pt->norm() > report.collapse_radius) || !(pt->norm() < 1.0)) {
      throw RefusalError("collapse_experiment: a and b must lie in the ring collapse_radius < |x| < 1");
    }
  }
  report.realized_delta = kInf;
  for (int m : m_list) {
    CollapseRow row;
    row.m = m;
    row.image_diameter = chordal_diameter(pushforward(fam, m, c));
    row.ab_distance = chordal_distance(ExtendedPoint::finite(fam.eval(m, a.coords())),
                                       ExtendedPoint::finite(fam.eval(m, b.coords())));
    report.realized_delta = std::min(report.realized_delta, row.ab_distance);
    report.rows.push_back(row);
  }
  report.diameters_strictly_decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].image_diameter < report.rows[i - 1].image_diameter)) {
      report.diameters_strictly_decreasing = false;
    }
  }
  std::size_t first = report.rows.size() - 1;
  while (first > 0 && report.rows[first - 1].ab_distance == report.rows.back().ab_distance) --first;
  report.ab_constant_from = report.rows.size() > 1 && first + 1 < report.rows.size() ? report.rows[first].m : 0;
  return report;
}

std::string collapse_csv(const CollapseReport& report) {
  std::ostringstream os;
  os << "m,h_image_diam,h_ab\n";
  char buf[96];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.m, r.image_diameter, r.ab_distance);
    os << buf;
  }
  return os.str();
}

std::string collapse_svg(const CollapseReport& report) {
  const double W = 480;
  const double H = 320;
  const double pad = 40;
  double lo = kInf;
  double hi = -kInf;
  for (const auto& r : report.rows) {
    for (double v : {r.image_diameter, r.ab_distance}) {
      if (v > 0.0) {
        lo = std::min(lo, std::log10(v));
        hi = std::max(hi, std::log10(v));
      }
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double mlo = std::log10(report.rows.front().m);
  double mhi = std::log10(report.rows.back().m);
  if (!(mhi > mlo)) mhi = mlo + 1.0;
  auto px = [&](int m) { return pad + (std::log10(m) - mlo) / (mhi - mlo) * (W - 2 * pad); };
  auto py = [&](double v) { return H - pad - (std::log10(v) - lo) / (hi - lo) * (H - 2 * pad); };
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", W, H);
  os << buf;
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int series = 0; series < 2; ++series) {
    os << "<polyline fill=\"none\" stroke=\"" << (series == 0 ? "#1f77b4" : "#d62728") << "\" points=\"";
    for (const auto& r : report.rows) {
      const double v = series == 0 ? r.image_diameter : r.ab_distance;
      if (v <= 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.3f,%.3f ", px(r.m), py(v));
      os << buf;
    }
    os << "\"/>\n";
  }
  os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"12\">h(f_m(C)) blue, h(f_m(a), f_m(b)) red; log-log in m</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::vector<ProbePoint> equicontinuity_modulus(const std::vector<MapMember>& members,
                                               std::span<const double> x0,
                                               const std::vector<double>& radii,
                                               const EquicontinuityOptions& opts) {
  if (members.empty()) throw InputError("equicontinuity_modulus: empty family");
  if (opts.shells < 1 || opts.directions < 1) throw InputError("equicontinuity_modulus: invalid sampling");
  const int n = members.front().family.dimension();
  if (static_cast<int>(x0.size()) != n) throw InputError("equicontinuity_modulus: dimension mismatch");
  if (!(norm(x0) < 1.0)) throw DomainError("equicontinuity_modulus: x0 must lie in the unit ball");
  std::vector<Vec> dirs;
  if (n == 2) {
    for (int k = 0; k < opts.directions; ++k) {
      const double t = 2.0 * std::numbers::pi * k / opts.directions;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
  } else {
    dirs = unit_sphere_samples(n, opts.directions, opts.seed);
  }
  std::vector<ExtendedPoint> centers;
  for (const MapMember& mm : members) {
    if (mm.family.dimension() != n) throw InputError("equicontinuity_modulus: mixed dimensions");
    centers.push_back(ExtendedPoint::finite(mm.family.eval(mm.m, x0)));
  }
  std::vector<ProbePoint> trace;
  Vec x(static_cast<std::size_t>(n));
  for (double r : radii) {
    if (!(r > 0.0)) throw InputError("equicontinuity_modulus: radii must be positive");
    double sup = 0.0;
    for (int s = 1; s <= opts.shells; ++s) {
      const double rr = r * s / opts.shells;
      for (const Vec& d : dirs) {
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = x0[static_cast<std::size_t>(i)] + rr * d[static_cast<std::size_t>(i)];
        if (!(norm(x) < 1.0)) continue;
        for (std::size_t k = 0; k < members.size(); ++k) {
          const double h = chordal_distance(ExtendedPoint::finite(members[k].family.eval(members[k].m, x)), centers[k]);
          sup = std::max(sup, h);
        }
      }
    }
    trace.push_back({r, sup});
  }
  return trace;
}

}  // namespace ringmod
