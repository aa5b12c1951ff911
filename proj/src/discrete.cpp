#include "ringmod/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

#include "ringmod/errors.hpp"

namespace ringmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

double sample_weight(const WeightField* q, const Vec& x) {
  if (q == nullptr) return 1.0;
  const double v = (*q)(x);
  if (!(v > 0.0) || std::isinf(v)) {
    throw InputError("discrete grid: weight must be positive and finite at cell centers");
  }
  return v;
}

// Adjacency from a per-cell neighbour enumerator.
template <typename Enumerate>
void build_adjacency(CellGraph& g, Enumerate&& enumerate) {
  g.offsets.assign(1, 0);
  std::vector<std::uint32_t> nb;
  for (std::size_t c = 0; c < g.size(); ++c) {
    nb.clear();
    enumerate(c, nb);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (std::uint32_t v : nb) {
      if (v == c) continue;
      g.neighbors.push_back(v);
      g.lengths.push_back(distance(g.centers[c], g.centers[v]));
    }
    g.offsets.push_back(g.neighbors.size());
  }
}

struct Dijkstra {
  std::vector<double> dist;
  std::vector<std::uint32_t> pred;
};

Dijkstra run_dijkstra(const GridPathProblem& pb, const std::vector<double>& rho) {
  const CellGraph& g = pb.graph;
  Dijkstra d;
  d.dist.assign(g.size(), kInf);
  d.pred.assign(g.size(), kNone);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const Terminal& s : pb.sources) {
    const double start = s.offset * rho[s.cell];
    if (start < d.dist[s.cell]) {
      d.dist[s.cell] = start;
      heap.emplace(start, s.cell);
    }
  }
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > d.dist[u]) continue;
    for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      const std::uint32_t v = g.neighbors[e];
      const double cand = du + 0.5 * g.lengths[e] * (rho[u] + rho[v]);
      if (cand < d.dist[v]) {
        d.dist[v] = cand;
        d.pred[v] = u;
        heap.emplace(cand, v);
      }
    }
  }
  return d;
}

std::vector<std::uint32_t> backtrack(const Dijkstra& d, std::uint32_t target) {
  std::vector<std::uint32_t> cells;
  for (std::uint32_t v = target; v != kNone; v = d.pred[v]) cells.push_back(v);
  std::reverse(cells.begin(), cells.end());
  return cells;
}

double edge_length(const CellGraph& g, std::uint32_t u, std::uint32_t v) {
  for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
    if (g.neighbors[e] == v) return g.lengths[e];
  }
  throw InputError("path: consecutive cells are not adjacent");
}

// Per-cell coefficients of the rho-length functional of a path.
std::vector<std::pair<std::uint32_t, double>> path_coefficients(const GridPathProblem& pb,
                                                                const std::vector<double>& src_off,
                                                                const std::vector<double>& tgt_off,
                                                                const std::vector<std::uint32_t>& cells) {
  std::vector<std::pair<std::uint32_t, double>> coef;
  coef.reserve(cells.size());
  for (std::uint32_t c : cells) coef.emplace_back(c, 0.0);
  coef.front().second += src_off[cells.front()];
  coef.back().second += tgt_off[cells.back()];
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double half = 0.5 * edge_length(pb.graph, cells[i], cells[i + 1]);
    coef[i].second += half;
    coef[i + 1].second += half;
  }
  std::sort(coef.begin(), coef.end());
  std::vector<std::pair<std::uint32_t, double>> merged;
  for (const auto& [c, a] : coef) {
    if (!merged.empty() && merged.back().first == c) {
      merged.back().second += a;
    } else {
      merged.emplace_back(c, a);
    }
  }
  return merged;
}

void terminal_offsets(const GridPathProblem& pb, std::vector<double>& src, std::vector<double>& tgt) {
  src.assign(pb.graph.size(), kInf);
  tgt.assign(pb.graph.size(), kInf);
  for (const Terminal& s : pb.sources) src[s.cell] = std::min(src[s.cell], s.offset);
  for (const Terminal& t : pb.targets) tgt[t.cell] = std::min(tgt[t.cell], t.offset);
}

void validate(const GridPathProblem& pb) {
  if (pb.graph.size() == 0) throw InputError("discrete_modulus: empty grid");
  if (pb.sources.empty() || pb.targets.empty()) throw InputError("discrete_modulus: empty boundary set");
  if (!(pb.p > 1.0)) throw InputError("discrete_modulus: p must exceed 1");
  for (const auto* set : {&pb.sources, &pb.targets}) {
    for (const Terminal& t : *set) {
      if (t.cell >= pb.graph.size()) throw InputError("discrete_modulus: terminal outside grid");
      if (!(t.offset >= 0.0)) throw InputError("discrete_modulus: negative terminal offset");
    }
  }
}

}  // namespace

CellGraph polar_annulus_grid(const Vec& center, double r1, double r2, int radial, int angular,
                             const WeightField* q) {
  if (center.size() != 2) throw InputError("polar_annulus_grid: center must be planar");
  if (!(r1 > 0.0) || !(r2 > r1)) throw InputError("polar_annulus_grid: require 0 < r1 < r2");
  if (radial < 1 || angular < 4) throw InputError("polar_annulus_grid: need radial >= 1, angular >= 4");
  CellGraph g;
  g.dimension = 2;
  const double dr = (r2 - r1) / radial;
  const double dt = 2.0 * std::numbers::pi / angular;
  for (int i = 0; i < radial; ++i) {
    const double r = r1 + (i + 0.5) * dr;
    for (int j = 0; j < angular; ++j) {
      const double t = (j + 0.5) * dt;
      Vec x{center[0] + r * std::cos(t), center[1] + r * std::sin(t)};
      g.weight.push_back(sample_weight(q, x));
      g.centers.push_back(std::move(x));
      g.measure.push_back(r * dr * dt);
    }
  }
  build_adjacency(g, [&](std::size_t c, std::vector<std::uint32_t>& nb) {
    const int i = static_cast<int>(c) / angular;
    const int j = static_cast<int>(c) % angular;
    for (int di = -1; di <= 1; ++di) {
      const int i2 = i + di;
      if (i2 < 0 || i2 >= radial) continue;
      for (int dj = -1; dj <= 1; ++dj) {
        const int j2 = (j + dj + angular) % angular;
        nb.push_back(static_cast<std::uint32_t>(i2 * angular + j2));
      }
    }
  });
  return g;
}

CellGraph spherical_shell_grid(const Vec& center, double r1, double r2, int radial, int polar,
                               int azimuthal, const WeightField* q) {
  if (center.size() != 3) throw InputError("spherical_shell_grid: center must be in R^3");
  if (!(r1 > 0.0) || !(r2 > r1)) throw InputError("spherical_shell_grid: require 0 < r1 < r2");
  if (radial < 1 || polar < 2 || azimuthal < 4) throw InputError("spherical_shell_grid: grid too coarse");
  CellGraph g;
  g.dimension = 3;
  const double dr = (r2 - r1) / radial;
  const double dth = std::numbers::pi / polar;
  const double dph = 2.0 * std::numbers::pi / azimuthal;
  for (int i = 0; i < radial; ++i) {
    const double lo = r1 + i * dr;
    const double hi = lo + dr;
    const double r = lo + 0.5 * dr;
    const double radial_part = (hi * hi * hi - lo * lo * lo) / 3.0;
    for (int j = 0; j < polar; ++j) {
      const double th = (j + 0.5) * dth;
      const double band = std::cos(j * dth) - std::cos((j + 1) * dth);
      for (int k = 0; k < azimuthal; ++k) {
        const double ph = (k + 0.5) * dph;
        Vec x{center[0] + r * std::sin(th) * std::cos(ph), center[1] + r * std::sin(th) * std::sin(ph),
              center[2] + r * std::cos(th)};
        g.weight.push_back(sample_weight(q, x));
        g.centers.push_back(std::move(x));
        g.measure.push_back(radial_part * band * dph);
      }
    }
  }
  build_adjacency(g, [&](std::size_t c, std::vector<std::uint32_t>& nb) {
    const int k = static_cast<int>(c) % azimuthal;
    const int j = (static_cast<int>(c) / azimuthal) % polar;
    const int i = static_cast<int>(c) / (azimuthal * polar);
    for (int di = -1; di <= 1; ++di) {
      const int i2 = i + di;
      if (i2 < 0 || i2 >= radial) continue;
      for (int dj = -1; dj <= 1; ++dj) {
        const int j2 = j + dj;
        if (j2 < 0 || j2 >= polar) continue;
        for (int dk = -1; dk <= 1; ++dk) {
          const int k2 = (k + dk + azimuthal) % azimuthal;
          nb.push_back(static_cast<std::uint32_t>((i2 * polar + j2) * azimuthal + k2));
        }
      }
    }
  });
  return g;
}

CellGraph box_grid(const Vec& lo, const Vec& hi, const std::vector<int>& counts, const WeightField* q) {
  const std::size_t d = lo.size();
  if ((d != 2 && d != 3) || hi.size() != d || counts.size() != d) {
    throw InputError("box_grid: need matching 2D or 3D bounds and counts");
  }
  Vec h(d);
  double cell = 1.0;
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    if (!(hi[a] > lo[a]) || counts[a] < 1) throw InputError("box_grid: degenerate box");
    h[a] = (hi[a] - lo[a]) / counts[a];
    cell *= h[a];
    total *= static_cast<std::size_t>(counts[a]);
  }
  CellGraph g;
  g.dimension = static_cast<int>(d);
  std::vector<int> idx(d, 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (std::size_t a = d; a-- > 0;) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(counts[a]));
      rem /= static_cast<std::size_t>(counts[a]);
    }
    Vec x(d);
    for (std::size_t a = 0; a < d; ++a) x[a] = lo[a] + (idx[a] + 0.5) * h[a];
    g.weight.push_back(sample_weight(q, x));
    g.centers.push_back(std::move(x));
    g.measure.push_back(cell);
  }
  build_adjacency(g, [&](std::size_t c, std::vector<std::uint32_t>& nb) {
    std::vector<int> at(d);
    std::size_t rem = c;
    for (std::size_t a = d; a-- > 0;) {
      at[a] = static_cast<int>(rem % static_cast<std::size_t>(counts[a]));
      rem /= static_cast<std::size_t>(counts[a]);
    }
    const int combos = d == 2 ? 9 : 27;
    for (int m = 0; m < combos; ++m) {
      int code = m;
      std::size_t flat = 0;
      bool inside = true;
      for (std::size_t a = 0; a < d; ++a) {
        const int delta = code % 3 - 1;
        code /= 3;
        const int v = at[a] + delta;
        if (v < 0 || v >= counts[a]) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      code = m;
      std::vector<int> to(d);
      for (std::size_t a = 0; a < d; ++a) {
        to[a] = at[a] + code % 3 - 1;
        code /= 3;
      }
      for (std::size_t a = 0; a < d; ++a) flat = flat * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(to[a]);
      nb.push_back(static_cast<std::uint32_t>(flat));
    }
  });
  return g;
}

GridPathProblem annulus_problem(int n, double p, double r1, double r2, int radial, int angular,
                                const WeightField* q) {
  if (n != 2 && n != 3) throw InputError("annulus_problem: n must be 2 or 3");
  if (radial < 16) throw InputError("annulus_problem: need at least 16 radial cells");
  if (!(p > 1.0)) throw InputError("annulus_problem: p must exceed 1");
  GridPathProblem pb;
  const Vec center(static_cast<std::size_t>(n), 0.0);
  pb.graph = n == 2 ? polar_annulus_grid(center, r1, r2, radial, angular, q)
                    : spherical_shell_grid(center, r1, r2, radial, angular, 2 * angular, q);
  pb.p = p;
  pb.spacing = (r2 - r1) / radial;
  pb.r1 = r1;
  pb.r2 = r2;
  const std::size_t layer = n == 2 ? static_cast<std::size_t>(angular) : static_cast<std::size_t>(2 * angular * angular);
  const double half = 0.5 * pb.spacing;
  for (std::size_t c = 0; c < layer; ++c) {
    pb.sources.push_back({static_cast<std::uint32_t>(c), half});
    pb.targets.push_back({static_cast<std::uint32_t>((radial - 1) * layer + c), half});
  }
  return pb;
}

GridPathProblem set_problem(CellGraph graph, const std::vector<std::uint32_t>& set_a,
                            const std::vector<std::uint32_t>& set_b, double p) {
  if (set_a.empty() || set_b.empty()) throw InputError("set_problem: empty cell set");
  std::set<std::uint32_t> a(set_a.begin(), set_a.end());
  for (std::uint32_t c : set_b) {
    if (a.count(c) != 0) throw InputError("set_problem: cell sets overlap");
  }
  GridPathProblem pb;
  pb.graph = std::move(graph);
  pb.p = p;
  for (std::uint32_t c : set_a) pb.sources.push_back({c, 0.0});
  for (std::uint32_t c : set_b) pb.targets.push_back({c, 0.0});
  double h = kInf;
  for (double len : pb.graph.lengths) h = std::min(h, len);
  pb.spacing = h;
  return pb;
}

std::vector<std::uint32_t> cells_near(const CellGraph& graph, const Continuum& c, double radius) {
  if (c.dimension() != graph.dimension) throw InputError("cells_near: dimension mismatch");
  std::vector<std::uint32_t> out;
  const auto& v = c.vertices();
  const std::size_t d = static_cast<std::size_t>(graph.dimension);
  for (std::size_t cell = 0; cell < graph.size(); ++cell) {
    const Vec& x = graph.centers[cell];
    double best = kInf;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const Vec& a = v[k].coords();
      if (k + 1 == v.size()) {
        best = std::min(best, distance(x, a));
        break;
      }
      const Vec& b = v[k + 1].coords();
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        num += (x[i] - a[i]) * (b[i] - a[i]);
        den += (b[i] - a[i]) * (b[i] - a[i]);
      }
      const double t = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
      Vec m(d);
      for (std::size_t i = 0; i < d; ++i) m[i] = a[i] + t * (b[i] - a[i]);
      best = std::min(best, distance(x, m));
    }
    if (best <= radius) out.push_back(static_cast<std::uint32_t>(cell));
  }
  return out;
}

int min_cells_crossed(const GridPathProblem& pb) {
  validate(pb);
  const CellGraph& g = pb.graph;
  std::vector<int> hops(g.size(), -1);
  std::deque<std::uint32_t> queue;
  for (const Terminal& s : pb.sources) {
    if (hops[s.cell] < 0) {
      hops[s.cell] = 1;
      queue.push_back(s.cell);
    }
  }
  while (!queue.empty()) {
    const std::uint32_t u = queue.front();
    queue.pop_front();
    for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      const std::uint32_t v = g.neighbors[e];
      if (hops[v] < 0) {
        hops[v] = hops[u] + 1;
        queue.push_back(v);
      }
    }
  }
  int best = std::numeric_limits<int>::max();
  for (const Terminal& t : pb.targets) {
    if (hops[t.cell] > 0) best = std::min(best, hops[t.cell]);
  }
  if (best == std::numeric_limits<int>::max()) throw InputError("min_cells_crossed: targets unreachable");
  return best;
}

double path_length(const GridPathProblem& pb, const std::vector<std::uint32_t>& cells,
                   const std::vector<double>& rho) {
  if (cells.empty()) throw InputError("path_length: empty path");
  if (rho.size() != pb.graph.size()) throw InputError("path_length: density size mismatch");
  std::vector<double> src;
  std::vector<double> tgt;
  terminal_offsets(pb, src, tgt);
  if (std::isinf(src[cells.front()]) || std::isinf(tgt[cells.back()])) {
    throw InputError("path_length: path does not join the boundary sets");
  }
  double len = 0.0;
  for (const auto& [c, a] : path_coefficients(pb, src, tgt, cells)) len += a * rho[c];
  return len;
}

ShortestPath shortest_path(const GridPathProblem& pb, const std::vector<double>& rho) {
  validate(pb);
  if (rho.size() != pb.graph.size()) throw InputError("shortest_path: density size mismatch");
  const Dijkstra d = run_dijkstra(pb, rho);
  ShortestPath best;
  best.length = kInf;
  std::uint32_t arg = kNone;
  for (const Terminal& t : pb.targets) {
    const double total = d.dist[t.cell] + t.offset * rho[t.cell];
    if (total < best.length) {
      best.length = total;
      arg = t.cell;
    }
  }
  if (arg == kNone) throw InputError("shortest_path: targets unreachable");
  best.cells = backtrack(d, arg);
  return best;
}

namespace {

// Dual coordinate ascent state for min sum w rho^p s.t. N rho >= 1.
class PathSolver {
 public:
  PathSolver(const GridPathProblem& pb, const SolverConfig& cfg) : pb_(pb), cfg_(cfg) {
    const CellGraph& g = pb.graph;
    w_.resize(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) {
      w_[c] = g.weight[c] * g.measure[c];
      if (!(w_[c] > 0.0) || std::isinf(w_[c])) throw InputError("discrete_modulus: cell weights must be positive");
    }
    s_.assign(g.size(), 0.0);
    rho_.assign(g.size(), 0.0);
    terminal_offsets(pb, src_off_, tgt_off_);
    expo_ = 1.0 / (pb.p - 1.0);
  }

  DiscreteModulusResult solve() {
    DiscreteModulusResult out;
    std::ostringstream trace;
    if (cfg_.verbose) trace << "iteration,objective,upper,violated\n";
    std::vector<double> unit(pb_.graph.size(), 1.0);
    double upper = kInf;
    double lower = 0.0;
    double ell = 0.0;
    int sweeps = 0;
    int stalled = 0;
    for (int round = 0; round < cfg_.max_rounds; ++round) {
      refresh();
      const std::vector<double>& search = round == 0 ? unit : rho_;
      const Dijkstra d = run_dijkstra(pb_, search);
      ell = kInf;
      for (const Terminal& t : pb_.targets) ell = std::min(ell, d.dist[t.cell] + t.offset * search[t.cell]);
      if (round > 0) {
        const double energy = energy_of(rho_);
        upper = ell > 0.0 ? energy / std::pow(ell, pb_.p) : kInf;
        lower = dual_value(energy);
        const double gap = (upper - lower) / upper;
        out.gap = gap;
        if (gap <= cfg_.tolerance) {
          if (cfg_.verbose) emit(trace, round, lower, upper, 0);
          return finish(out, ell, upper, lower, round, sweeps, trace);
        }
      }
      // Add violated paths (every search target on the first round).
      const double cut = 1.0 - 0.25 * cfg_.tolerance / pb_.p;
      int added = 0;
      int violated = 0;
      for (const Terminal& t : pb_.targets) {
        const double total = d.dist[t.cell] + t.offset * search[t.cell];
        if (round > 0 && !(total < cut)) continue;
        ++violated;
        std::vector<std::uint32_t> cells = backtrack(d, t.cell);
        if (known_.insert(cells).second) {
          add_path(cells);
          ++added;
        }
      }
      if (cfg_.verbose) emit(trace, round, lower, upper, violated);
      bool settled = false;
      for (int k = 0; k < cfg_.sweeps_per_round && sweeps < cfg_.max_sweeps; ++k) {
        ++sweeps;
        if (sweep() <= 0.1 * cfg_.tolerance) {
          settled = true;
          break;
        }
      }
      prune();
      stalled = (added == 0 && settled && round > 0) ? stalled + 1 : 0;
      if (stalled >= 2) {
        throw NonConvergenceError("discrete_modulus: no violated path left but the duality gap is open",
                                  dump(round, lower, upper));
      }
      if (sweeps >= cfg_.max_sweeps) {
        throw NonConvergenceError("discrete_modulus: sweep budget exhausted", dump(round, lower, upper));
      }
    }
    throw NonConvergenceError("discrete_modulus: round budget exhausted", dump(cfg_.max_rounds, lower, upper));
  }

 private:
  struct Path {
    std::size_t begin;
    std::size_t end;
    double lambda = 0.0;
    int idle = 0;
    std::vector<std::uint32_t> key;
  };

  // Constraints that stayed inactive for several rounds are dropped (and may
  // be regenerated later by the path search).
  void prune() {
    constexpr int kIdleRounds = 3;
    std::vector<Path> kept;
    std::vector<std::uint32_t> cells;
    std::vector<double> coefs;
    for (Path& path : paths_) {
      path.idle = path.lambda > 0.0 ? 0 : path.idle + 1;
      if (path.idle >= kIdleRounds) {
        known_.erase(path.key);
        continue;
      }
      const std::size_t begin = cells.size();
      cells.insert(cells.end(), cell_.begin() + path.begin, cell_.begin() + path.end);
      coefs.insert(coefs.end(), coef_.begin() + path.begin, coef_.begin() + path.end);
      path.end = cells.size();
      path.begin = begin;
      kept.push_back(std::move(path));
    }
    paths_ = std::move(kept);
    cell_ = std::move(cells);
    coef_ = std::move(coefs);
  }

  double rho_of(double s, std::size_t c) const {
    if (s <= 0.0) return 0.0;
    if (expo_ == 1.0) return s / (2.0 * w_[c]);
    if (expo_ == 2.0) {
      const double base = s / (pb_.p * w_[c]);
      return base * base;
    }
    return std::pow(s / (pb_.p * w_[c]), expo_);
  }

  void add_path(const std::vector<std::uint32_t>& cells) {
    const auto coef = path_coefficients(pb_, src_off_, tgt_off_, cells);
    Path path{cell_.size(), cell_.size() + coef.size(), 0.0, 0, cells};
    for (const auto& [c, a] : coef) {
      cell_.push_back(c);
      coef_.push_back(a);
    }
    paths_.push_back(path);
  }

  void refresh() {
    std::fill(s_.begin(), s_.end(), 0.0);
    for (const Path& path : paths_) {
      for (std::size_t i = path.begin; i < path.end; ++i) s_[cell_[i]] += path.lambda * coef_[i];
    }
    for (std::size_t c = 0; c < s_.size(); ++c) rho_[c] = rho_of(s_[c], c);
  }

  double length_at(const Path& path, double delta) const {
    double len = 0.0;
    for (std::size_t i = path.begin; i < path.end; ++i) {
      len += coef_[i] * rho_of(s_[cell_[i]] + delta * coef_[i], cell_[i]);
    }
    return len;
  }

  double slope_at(const Path& path, double delta) const {
    // d rho / d s = rho / ((p - 1) s).
    double d = 0.0;
    for (std::size_t i = path.begin; i < path.end; ++i) {
      const std::size_t c = cell_[i];
      const double s = s_[c] + delta * coef_[i];
      if (s <= 0.0) continue;
      d += coef_[i] * coef_[i] * expo_ * rho_of(s, c) / s;
    }
    return d;
  }

  // One pass over all constraints; returns the largest violation seen.
  double sweep() {
    double worst = 0.0;
    for (Path& path : paths_) {
      const double len = length_at(path, 0.0);
      const double viol = path.lambda > 0.0 ? std::abs(1.0 - len) : std::max(0.0, 1.0 - len);
      worst = std::max(worst, viol);
      if (viol == 0.0) continue;
      const double delta = solve_step(path, len);
      if (delta == 0.0) continue;
      path.lambda += delta;
      if (path.lambda < 0.0) path.lambda = 0.0;
      for (std::size_t i = path.begin; i < path.end; ++i) {
        const std::size_t c = cell_[i];
        s_[c] += delta * coef_[i];
        if (s_[c] < 0.0) s_[c] = 0.0;
        rho_[c] = rho_of(s_[c], c);
      }
    }
    return worst;
  }

  // Step in lambda_k making the path length 1, clipped at lambda_k >= 0.
  double solve_step(const Path& path, double len) {
    const double lo_limit = -path.lambda;
    if (pb_.p == 2.0) {
      double a = 0.0;
      for (std::size_t i = path.begin; i < path.end; ++i) a += coef_[i] * coef_[i] / (2.0 * w_[cell_[i]]);
      return std::max((1.0 - len) / a, lo_limit);
    }
    if (len > 1.0 && length_at(path, lo_limit) >= 1.0) return lo_limit;
    // Safeguarded Newton on length_at(delta) = 1; the root is bracketed by
    // [lo, hi] with hi possibly still unknown.
    double lo = len > 1.0 ? lo_limit : 0.0;
    double hi = len > 1.0 ? 0.0 : kInf;
    double x = 0.0;
    double f = len - 1.0;
    for (int it = 0; it < 200; ++it) {
      const double df = slope_at(path, x);
      double next = df > 0.0 ? x - f / df : kInf;
      if (!(next > lo && next < hi)) {
        if (std::isinf(hi)) {
          // Nothing flows through the path yet: start from the step that
          // solves the problem with s = 0 on its cells, then grow.
          double scale = 0.0;
          for (std::size_t i = path.begin; i < path.end; ++i) {
            scale += coef_[i] * rho_of(coef_[i], cell_[i]);
          }
          next = std::max(std::pow(1.0 / scale, 1.0 / expo_), 2.0 * std::abs(x));
        } else {
          next = 0.5 * (lo + hi);
        }
      }
      x = next;
      f = length_at(path, x) - 1.0;
      if (std::abs(f) <= 1e-14) return x;
      if (f < 0.0) lo = x; else hi = x;
      if (hi - lo <= 1e-15 * std::abs(hi)) return x;
    }
    return x;
  }

  double energy_of(const std::vector<double>& rho) const {
    double e = 0.0;
    for (std::size_t c = 0; c < rho.size(); ++c) {
      if (rho[c] > 0.0) e += w_[c] * std::pow(rho[c], pb_.p);
    }
    return e;
  }

  double dual_value(double energy) const {
    double sum = 0.0;
    for (const Path& path : paths_) sum += path.lambda;
    return sum - (pb_.p - 1.0) * energy;
  }

  void emit(std::ostringstream& trace, int round, double lower, double upper, int violated) const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", round, lower, upper, violated);
    trace << buf;
  }

  std::string dump(int round, double lower, double upper) const {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "round=%d lower=%.17g upper=%.17g paths=%zu\n", round, lower, upper, paths_.size());
    os << buf;
    const std::size_t show = std::min<std::size_t>(paths_.size(), 16);
    for (std::size_t k = 0; k < show; ++k) {
      const Path& path = paths_[k];
      std::snprintf(buf, sizeof buf, "path %zu: cells=%zu lambda=%.17g length=%.17g\n", k, path.end - path.begin,
                    path.lambda, length_at(path, 0.0));
      os << buf;
    }
    return os.str();
  }

  DiscreteModulusResult& finish(DiscreteModulusResult& out, double ell, double upper, double lower, int round,
                                int sweeps, std::ostringstream& trace) {
    out.value = upper;
    out.lower_bound = lower;
    out.rho = rho_;
    for (double& r : out.rho) r /= ell;
    out.rounds = round;
    out.sweeps = sweeps;
    out.paths = paths_.size();
    out.trace_csv = trace.str();
    return out;
  }

  const GridPathProblem& pb_;
  SolverConfig cfg_;
  std::vector<double> w_;
  std::vector<double> s_;
  std::vector<double> rho_;
  std::vector<double> src_off_;
  std::vector<double> tgt_off_;
  double expo_ = 1.0;
  std::vector<Path> paths_;
  std::vector<std::uint32_t> cell_;
  std::vector<double> coef_;
  std::set<std::vector<std::uint32_t>> known_;
};

}  // namespace

DiscreteModulusResult discrete_modulus(const GridPathProblem& problem, const SolverConfig& cfg) {
  validate(problem);
  if (!(cfg.tolerance > 0.0) || cfg.max_rounds < 1 || cfg.sweeps_per_round < 1) {
    throw InputError("discrete_modulus: invalid solver configuration");
  }
  PathSolver solver(problem, cfg);
  return solver.solve();
}

MinorizationCheck three_set_minorization(const CellGraph& graph, const std::vector<std::uint32_t>& f1,
                                         const std::vector<std::uint32_t>& f2,
                                         const std::vector<std::uint32_t>& f3, double p,
                                         const SolverConfig& cfg) {
  MinorizationCheck out;
  const GridPathProblem p12 = set_problem(graph, f1, f2, p);
  const GridPathProblem p13 = set_problem(graph, f1, f3, p);
  const GridPathProblem p23 = set_problem(graph, f2, f3, p);
  const DiscreteModulusResult r12 = discrete_modulus(p12, cfg);
  out.m12 = r12.value;
  out.m13 = discrete_modulus(p13, cfg).value;
  out.m23 = discrete_modulus(p23, cfg).value;
  const ShortestPath g13 = shortest_path(p13, r12.rho);
  const ShortestPath g23 = shortest_path(p23, r12.rho);
  out.cross_needed = g13.length < 1.0 / 3.0 && g23.length < 1.0 / 3.0;
  const std::set<std::uint32_t> a(g13.cells.begin(), g13.cells.end());
  bool shared = false;
  for (std::uint32_t c : g23.cells) shared = shared || a.count(c) != 0;
  out.m_cross = shared ? kInf : discrete_modulus(set_problem(graph, g13.cells, g23.cells, p), cfg).value;
  out.bound = minorization_bound(out.m13, out.m23, out.m_cross, p);
  return out;
}

}  // namespace ringmod
