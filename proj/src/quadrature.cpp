#include "ringmod/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <tuple>

#include "ringmod/errors.hpp"

namespace ringmod {

double unit_sphere_area(int n) {
  if (n < 1) throw InputError("unit_sphere_area: n must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

void QuadratureConfig::validate() const {
  if (sphere_order < 1 || sphere_samples < 1 || radial_points < 1 || max_subdivisions < 1 ||
      workers < 1) {
    throw InputError("QuadratureConfig: sample counts must be >= 1");
  }
  if (!(target_rel_tol > 0.0 && target_rel_tol < 1.0)) {
    throw InputError("QuadratureConfig: target_rel_tol must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------
// Random sampling

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr int kBlockSize = 256;

double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller; avoids the implementation-defined std::normal_distribution.
void fill_gaussian(std::mt19937_64& rng, Vec& v) {
  for (std::size_t i = 0; i < v.size(); i += 2) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    v[i] = rad * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < v.size()) v[i + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
  }
}

std::vector<Vec> blocked_samples(int n, int count, std::uint64_t seed, bool interior) {
  if (n < 1 || count < 1) throw InputError("sampling: need n >= 1 and count >= 1");
  std::vector<Vec> out(static_cast<std::size_t>(count), Vec(static_cast<std::size_t>(n)));
  const int blocks = (count + kBlockSize - 1) / kBlockSize;
  for (int b = 0; b < blocks; ++b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    const int lo = b * kBlockSize;
    const int hi = std::min(count, lo + kBlockSize);
    for (int i = lo; i < hi; ++i) {
      Vec& v = out[static_cast<std::size_t>(i)];
      double len = 0.0;
      do {
        fill_gaussian(rng, v);
        len = norm(v);
      } while (len == 0.0);
      double scale = 1.0 / len;
      if (interior) scale *= std::pow(uniform01(rng), 1.0 / n);
      for (double& x : v) x *= scale;
    }
  }
  return out;
}

}  // namespace

std::vector<Vec> unit_ball_samples(int n, int count, std::uint64_t seed) {
  return blocked_samples(n, count, seed, true);
}

std::vector<Vec> unit_sphere_samples(int n, int count, std::uint64_t seed) {
  return blocked_samples(n, count, seed, false);
}

// ---------------------------------------------------------------------------
// Weight fields

WeightField::WeightField(int dimension, PointFunction evaluate)
    : dimension_(dimension), evaluate_(std::move(evaluate)) {
  if (dimension_ < 2) throw InputError("WeightField: dimension must be >= 2");
  if (!evaluate_) throw InputError("WeightField: empty evaluation callback");
}

WeightField WeightField::constant(int dimension, double c) {
  if (!(c >= 0.0)) throw InputError("WeightField::constant: need c >= 0");
  WeightField w(dimension, [c](std::span<const double>) { return c; });
  w.profile_ = QProfile::constant(c);
  w.center_ = Vec(static_cast<std::size_t>(dimension), 0.0);
  return w;
}

WeightField WeightField::radial(int dimension, Vec center, QProfile profile) {
  if (static_cast<int>(center.size()) != dimension) {
    throw InputError("WeightField::radial: center dimension mismatch");
  }
  auto fn = profile.function();
  WeightField w(dimension, [fn, center](std::span<const double> x) { return fn(distance(x, center)); });
  w.profile_ = std::move(profile);
  w.center_ = std::move(center);
  return w;
}

WeightField WeightField::without_profile() const { return WeightField(dimension_, evaluate_); }

double WeightField::radial_consistency(int samples, double max_radius, std::uint64_t seed) const {
  if (!profile_) return 0.0;
  const auto pts = unit_ball_samples(dimension_, samples, seed);
  double worst = 0.0;
  Vec y(static_cast<std::size_t>(dimension_));
  for (const auto& u : pts) {
    for (int i = 0; i < dimension_; ++i) {
      y[static_cast<std::size_t>(i)] = (*center_)[static_cast<std::size_t>(i)] + max_radius * u[static_cast<std::size_t>(i)];
    }
    const double direct = evaluate_(y);
    const double radial = (*profile_)(distance(y, *center_));
    if (std::isinf(direct) && std::isinf(radial)) continue;
    worst = std::max(worst, std::abs(direct - radial) / std::max(1.0, std::abs(radial)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sphere rules

const GaussRule& gauss_legendre(int order) {
  if (order < 1) throw InputError("gauss_legendre: order must be >= 1");
  thread_local std::map<int, GaussRule> cache;
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

SphereRule sphere_rule(int n, const QuadratureConfig& cfg) {
  SphereRule rule;
  rule.dimension = n;
  if (n == 2) {
    const int m = 2 * cfg.sphere_order;
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / m;
      rule.directions.push_back({std::cos(t), std::sin(t)});
      rule.weights.push_back(1.0 / m);
    }
  } else if (n == 3) {
    const auto& gl = gauss_legendre(cfg.sphere_order);
    const int m = 2 * cfg.sphere_order;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double z = gl.nodes[i];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * (k + 0.5) / m;
        rule.directions.push_back({s * std::cos(t), s * std::sin(t), z});
        rule.weights.push_back(0.5 * gl.weights[i] / m);
      }
    }
  } else if (n >= 4) {
    rule.directions = unit_sphere_samples(n, cfg.sphere_samples, cfg.rng_seed);
    rule.weights.assign(rule.directions.size(), 1.0 / static_cast<double>(rule.directions.size()));
  } else {
    throw InputError("sphere_rule: dimension must be >= 2");
  }
  return rule;
}

namespace {

const SphereRule& cached_sphere_rule(int n, const QuadratureConfig& cfg) {
  using Key = std::tuple<int, int, int, std::uint64_t>;
  thread_local std::map<Key, SphereRule> cache;
  const Key key{n, n <= 3 ? cfg.sphere_order : 0, n <= 3 ? 0 : cfg.sphere_samples,
                n <= 3 ? 0 : cfg.rng_seed};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache.emplace(key, sphere_rule(n, cfg)).first->second;
}

}  // namespace

Estimate sphere_average(const WeightField& q, std::span<const double> x0, double r,
                        const QuadratureConfig& cfg) {
  cfg.validate();
  const int n = q.dimension();
  if (static_cast<int>(x0.size()) != n) throw InputError("sphere_average: dimension mismatch");
  if (!(r > 0.0)) throw InputError("sphere_average: radius must be > 0");
  const auto& rule = cached_sphere_rule(n, cfg);

  const std::size_t count = rule.directions.size();
  const std::size_t blocks = (count + kBlockSize - 1) / kBlockSize;
  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
    bool infinite = false;
  };
  auto run_block = [&](std::size_t b) {
    Partial part;
    Vec y(static_cast<std::size_t>(n));
    const std::size_t lo = b * kBlockSize;
    const std::size_t hi = std::min(count, lo + kBlockSize);
    for (std::size_t i = lo; i < hi; ++i) {
      for (int d = 0; d < n; ++d) {
        y[static_cast<std::size_t>(d)] = x0[static_cast<std::size_t>(d)] + r * rule.directions[i][static_cast<std::size_t>(d)];
      }
      const double v = q(y);
      if (std::isnan(v) || v < 0.0) throw ContractError("sphere_average: weight returned a negative or NaN value");
      if (std::isinf(v)) {
        part.infinite = true;
        continue;
      }
      part.sum += rule.weights[i] * v;
      part.sum_sq += rule.weights[i] * v * v;
    }
    return part;
  };

  std::vector<Partial> parts(blocks);
  if (cfg.workers > 1 && blocks > 1) {
    std::vector<std::future<void>> jobs;
    const std::size_t stride = static_cast<std::size_t>(cfg.workers);
    for (std::size_t w = 0; w < stride; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t b = w; b < blocks; b += stride) parts[b] = run_block(b);
      }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t b = 0; b < blocks; ++b) parts[b] = run_block(b);
  }

  Estimate est;
  est.evaluations = static_cast<int>(count);
  double mean_sq = 0.0;
  for (const auto& part : parts) {
    if (part.infinite) return Estimate::infinity();
    est.value += part.sum;
    mean_sq += part.sum_sq;
  }
  if (n >= 4) {
    const double var = std::max(0.0, mean_sq - est.value * est.value);
    est.abs_error = std::sqrt(var / static_cast<double>(count));
  }
  return est;
}

// ---------------------------------------------------------------------------
// Adaptive radial integration

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

struct Divergent {};

double checked(double v) {
  if (std::isnan(v)) throw ContractError("radial_integral: integrand returned NaN");
  if (std::isinf(v)) throw Divergent{};
  return v;
}

Panel gk15(const ScalarFunction& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = checked(f(c));
  double kron = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[static_cast<std::size_t>(j)];
    const double f1 = checked(f(c - dx));
    const double f2 = checked(f(c + dx));
    kron += kWgk[static_cast<std::size_t>(j)] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

Estimate adaptive(const ScalarFunction& f, double a, double b, const QuadratureConfig& cfg) {
  Estimate est;
  try {
    std::priority_queue<Panel> heap;
    double total = 0.0;
    double err = 0.0;
    const int initial = std::max(1, cfg.radial_points);
    for (int k = 0; k < initial; ++k) {
      const double lo = a + (b - a) * k / initial;
      const double hi = k + 1 == initial ? b : a + (b - a) * (k + 1) / initial;
      Panel p = gk15(f, lo, hi);
      total += p.value;
      err += p.error;
      heap.push(p);
    }
    int panels = initial;
    est.evaluations = 15 * initial;
    while (err > std::max(cfg.target_rel_tol * std::abs(total), 1e-300)) {
      if (panels >= cfg.max_subdivisions) {
        est.converged = false;
        break;
      }
      Panel worst = heap.top();
      heap.pop();
      const double mid = 0.5 * (worst.a + worst.b);
      if (!(mid > worst.a && mid < worst.b)) {
        est.converged = false;
        heap.push(worst);
        break;
      }
      Panel left = gk15(f, worst.a, mid);
      Panel right = gk15(f, mid, worst.b);
      est.evaluations += 30;
      ++panels;
      total += left.value + right.value - worst.value;
      err += left.error + right.error - worst.error;
      heap.push(left);
      heap.push(right);
    }
    // Re-sum for accuracy after many incremental updates.
    double sum = 0.0;
    double esum = 0.0;
    std::vector<Panel> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
      all.push_back(heap.top());
      heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : all) {
      sum += p.value;
      esum += p.error;
    }
    est.value = sum;
    est.abs_error = esum;
  } catch (const Divergent&) {
    return Estimate::infinity();
  }
  return est;
}

// Local power exponent alpha of |f| ~ dist^{-alpha} at an endpoint.
double endpoint_exponent(const ScalarFunction& f, double a, double b, bool at_lower) {
  auto probe = [&](int k) {
    const double d = (b - a) * std::pow(10.0, -k);
    const double t = at_lower ? a + d : b - d;
    return std::abs(f(t));
  };
  const double v3 = probe(3);
  const double v7 = probe(7);
  const double v9 = probe(9);
  if (std::isinf(v9) || std::isnan(v9)) return std::numeric_limits<double>::infinity();
  if (!(v9 > 0.0) || !(v7 > 0.0)) return 0.0;
  if (!(v9 > 1.5 * v3)) return 0.0;
  return std::log(v9 / v7) / (2.0 * std::log(10.0));
}

constexpr double kNonIntegrable = 1.0 - 1e-3;

// Integral with a possible singularity only at `a` (lower) or `b` (upper).
Estimate integrate_one_sided(const ScalarFunction& f, double a, double b, bool lower,
                             double alpha, const QuadratureConfig& cfg) {
  if (alpha >= kNonIntegrable) return Estimate::infinity();
  if (alpha <= 1e-3) {
    if (a > 0.0 && b / a >= 32.0) {
      ScalarFunction g = [&f](double u) {
        const double t = std::exp(u);
        return f(t) * t;
      };
      return adaptive(g, std::log(a), std::log(b), cfg);
    }
    return adaptive(f, a, b, cfg);
  }
  const double k = std::clamp(std::ceil(1.0 / (1.0 - alpha) - 0.01), 2.0, 12.0);
  const double len = b - a;
  ScalarFunction g = [&f, a, b, len, k, lower](double s) {
    const double sk = std::pow(s, k);
    double t = lower ? a + len * sk : b - len * sk;
    // Keep t off the singular endpoint when s^k underflows relative to it.
    if (lower && t <= a) t = std::nextafter(a, b);
    if (!lower && t >= b) t = std::nextafter(b, a);
    return f(t) * len * k * std::pow(s, k - 1.0);
  };
  return adaptive(g, 0.0, 1.0, cfg);
}

}  // namespace

Estimate radial_integral(const ScalarFunction& f, double a, double b, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b)) {
    throw InputError("radial_integral: require 0 <= a < b < inf");
  }
  const double alpha_lo = endpoint_exponent(f, a, b, true);
  const double alpha_hi = endpoint_exponent(f, a, b, false);
  if (alpha_lo > 1e-3 && alpha_hi > 1e-3) {
    const double mid = 0.5 * (a + b);
    Estimate left = integrate_one_sided(f, a, mid, true, alpha_lo, cfg);
    Estimate right = integrate_one_sided(f, mid, b, false, alpha_hi, cfg);
    if (left.infinite || right.infinite) return Estimate::infinity();
    return {left.value + right.value, left.abs_error + right.abs_error, false,
            left.converged && right.converged, left.evaluations + right.evaluations};
  }
  if (alpha_hi > 1e-3) return integrate_one_sided(f, a, b, false, alpha_hi, cfg);
  return integrate_one_sided(f, a, b, true, alpha_lo, cfg);
}

ScalarFunction spherical_mean_function(const WeightField& q, std::span<const double> y0,
                                       const QuadratureConfig& cfg) {
  Vec center(y0.begin(), y0.end());
  if (q.is_radial() && q.center() && distance(*q.center(), center) == 0.0) {
    return q.radial_profile()->function();
  }
  return [q, center, cfg](double r) {
    const Estimate e = sphere_average(q, center, r, cfg);
    return e.infinite ? std::numeric_limits<double>::infinity() : e.value;
  };
}

Estimate annulus_weighted_integral(const WeightField& q, std::span<const double> y0, double eps,
                                   double eps0, const ScalarFunction& psi, double p,
                                   const QuadratureConfig& cfg) {
  const int n = q.dimension();
  if (static_cast<int>(y0.size()) != n) throw InputError("annulus_weighted_integral: dimension mismatch");
  if (!(eps > 0.0) || !(eps0 > eps)) throw InputError("annulus_weighted_integral: need 0 < eps < eps0");
  if (!(p > 0.0)) throw InputError("annulus_weighted_integral: need p > 0");
  const ScalarFunction mean = spherical_mean_function(q, y0, cfg);
  const double area = unit_sphere_area(n);
  ScalarFunction integrand = [&](double r) {
    const double qr = mean(r);
    if (qr == 0.0) return 0.0;
    return qr * std::pow(psi(r), p) * std::pow(r, n - 1);
  };
  Estimate est = radial_integral(integrand, eps, eps0, cfg);
  if (est.infinite) return est;
  est.value *= area;
  est.abs_error *= area;
  return est;
}

}  // namespace ringmod
