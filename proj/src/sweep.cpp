#include "ringmod/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "ringmod/criteria.hpp"
#include "ringmod/errors.hpp"
#include "ringmod/quadrature.hpp"

namespace ringmod {

bool Compactum::contains(std::span<const double> x) const {
  const double r = norm(x);
  return r >= k_inner && r <= k_outer;
}

namespace {

// Uniform double in [0, 1) from a splitmix64 stream; portable across standard
// libraries, unlike <random> distributions.
struct Stream {
  std::uint64_t state;
  double next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
};

// Distance from the origin to the segment [a, b].
double segment_clearance(const Vec& a, const Vec& b) {
  double ab2 = 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    dot += -a[i] * (b[i] - a[i]);
  }
  const double t = ab2 > 0.0 ? std::clamp(dot / ab2, 0.0, 1.0) : 0.0;
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + t * (b[i] - a[i]);
  return norm(c);
}

}  // namespace

std::vector<Continuum> lightness_battery(int n, const Compactum& k, double epsilon, int count,
                                         std::uint64_t seed, int samples) {
  if (n < 2) throw InputError("lightness_battery: n must be >= 2");
  if (!(k.k_inner >= 0.0) || !(k.k_outer > k.k_inner) || !(k.k_outer < 1.0)) {
    throw InputError("lightness_battery: require 0 <= k_inner < k_outer < 1");
  }
  if (!(epsilon > 0.0) || count < 1 || samples < 2) throw InputError("lightness_battery: invalid parameters");
  Stream rng{seed};
  std::vector<Continuum> out;
  const int max_attempts = 1000 * count;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    const auto radius = [&] { return k.k_inner + (k.k_outer - k.k_inner) * rng.next(); };
    if (out.size() % 2 == 0) {
      const double r = radius();
      const double t0 = 2.0 * std::numbers::pi * rng.next();
      const double span = 0.2 + (2.0 * std::numbers::pi - 0.4) * rng.next();
      Continuum c = Continuum::arc(n, r, t0, t0 + span, samples);
      if (chordal_diameter(c) >= epsilon) out.push_back(std::move(c));
      continue;
    }
    Vec a = unit_sphere_samples(n, 1, derive_seed(seed, 2 * static_cast<std::uint64_t>(attempt))).front();
    Vec b = unit_sphere_samples(n, 1, derive_seed(seed, 2 * static_cast<std::uint64_t>(attempt) + 1)).front();
    const double ra = radius();
    const double rb = radius();
    for (double& x : a) x *= ra;
    for (double& x : b) x *= rb;
    if (segment_clearance(a, b) < k.k_inner) continue;
    Continuum c = Continuum::segment(a, b, samples);
    if (chordal_diameter(c) >= epsilon) out.push_back(std::move(c));
  }
  if (static_cast<int>(out.size()) < count) {
    throw InputError("lightness_battery: could not place enough continua with diameter >= epsilon");
  }
  return out;
}

LightnessReport lightness_sweep(const std::vector<LightnessMember>& members,
                                const std::vector<Continuum>& continua, const LightnessOptions& opts) {
  if (members.empty() || continua.empty()) throw InputError("lightness_sweep: empty family or battery");
  if (opts.workers < 1) throw InputError("lightness_sweep: workers must be >= 1");
  const int n = members.front().family.dimension();
  LightnessReport report;
  report.min_continuum_diameter = std::numeric_limits<double>::infinity();
  for (const Continuum& c : continua) {
    if (c.dimension() != n) throw InputError("lightness_sweep: dimension mismatch");
    for (const ExtendedPoint& v : c.vertices()) {
      if (v.is_infinite() || !opts.compactum.contains(v.coords())) {
        throw InputError("lightness_sweep: continuum leaves the compactum");
      }
    }
    const double h = chordal_diameter(c);
    if (h < opts.epsilon) throw InputError("lightness_sweep: continuum with h(C) < epsilon");
    report.min_continuum_diameter = std::min(report.min_continuum_diameter, h);
  }
  // Divergence precondition, once per distinct profile (copies of a family
  // share their profile data, so its address identifies the profile).
  std::map<const void*, Verdict> verdicts;
  for (const LightnessMember& mm : members) {
    if (mm.family.dimension() != n) throw InputError("lightness_sweep: mixed dimensions");
    if (mm.m < 1) throw InputError("lightness_sweep: member index must be >= 1");
    const RadialProfile& prof = mm.family.profile();
    const void* key = &prof.weight_profile();
    Verdict v;
    if (auto it = verdicts.find(key); it != verdicts.end()) {
      v = it->second;
    } else {
      v = divergence_test(prof.weight_profile().function(), prof.p(), n, 1.0, opts.quad).verdict;
      verdicts.emplace(key, v);
    }
    if (v != Verdict::diverges && !opts.negative_control) {
      throw RefusalError("lightness_sweep: member '" + mm.label + "' has divergence verdict " +
                         to_string(v) + "; uniform lightness needs a divergent profile");
    }
  }

  report.rows.resize(members.size());
  const auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      LightnessRow row;
      row.label = members[i].label;
      row.m = members[i].m;
      row.min_image_diameter = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < continua.size(); ++j) {
        const double h = chordal_diameter(pushforward(members[i].family, members[i].m, continua[j]));
        if (h < row.min_image_diameter) {
          row.min_image_diameter = h;
          row.argmin_continuum = j;
        }
      }
      report.rows[i] = row;
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(opts.workers), members.size());
  if (workers <= 1) {
    work(0, members.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (members.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(members.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  report.minimum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].min_image_diameter < report.minimum) {
      report.minimum = report.rows[i].min_image_diameter;
      report.argmin_row = i;
    }
  }
  return report;
}

std::string lightness_csv(const LightnessReport& report) {
  std::ostringstream os;
  os << "label,m,min_h_image,argmin_continuum\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, ",%d,%.17g,%zu\n", r.m, r.min_image_diameter, r.argmin_continuum);
    os << r.label << buf;
  }
  return os.str();
}

}  // namespace ringmod
