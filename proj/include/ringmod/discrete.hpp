#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringmod/geometry.hpp"
#include "ringmod/modulus.hpp"
#include "ringmod/quadrature.hpp"

namespace ringmod {

/// Cells of a grid domain with their adjacency. Edges carry the Euclidean
/// distance between cell centers; a density rho is constant on each cell.
struct CellGraph {
  int dimension = 2;
  std::vector<Vec> centers;
  /// Lebesgue measure of each cell.
  std::vector<double> measure;
  /// Weight Q sampled at the cell center.
  std::vector<double> weight;
  /// CSR adjacency.
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> neighbors;
  std::vector<double> lengths;

  std::size_t size() const noexcept { return centers.size(); }
};

/// Polar grid of A(center, r1, r2) in the plane: `radial` x `angular` cells,
/// 8-neighbour connectivity, periodic in angle. Cell (i, j) has index
/// i * angular + j, i counted outward.
CellGraph polar_annulus_grid(const Vec& center, double r1, double r2, int radial, int angular,
                             const WeightField* q = nullptr);

/// Spherical shell grid in R^3 over (r, theta, phi), 26-neighbour
/// connectivity, periodic in phi. Index (i * polar + j) * azimuthal + k.
CellGraph spherical_shell_grid(const Vec& center, double r1, double r2, int radial, int polar,
                               int azimuthal, const WeightField* q = nullptr);

/// Axis-aligned box split into counts[d] cells per axis (2D or 3D), 8 resp.
/// 26-neighbour connectivity. Index is row-major with the last axis fastest.
CellGraph box_grid(const Vec& lo, const Vec& hi, const std::vector<int>& counts,
                   const WeightField* q = nullptr);

/// A path end: the cell and the distance from the boundary set to the cell
/// center that the path also has to cover.
struct Terminal {
  std::uint32_t cell = 0;
  double offset = 0.0;
};

/// Paths in a cell graph joining `sources` to `targets`. The rho-length of a
/// cell path v_0..v_k is offset_0 rho_0 + sum |v_i v_{i+1}| (rho_i +
/// rho_{i+1}) / 2 + offset_k rho_k.
struct GridPathProblem {
  CellGraph graph;
  std::vector<Terminal> sources;
  std::vector<Terminal> targets;
  double p = 2.0;
  /// Characteristic radial spacing (for annuli, the radial cell width).
  double spacing = 0.0;
  /// Annulus radii when the problem is a ring, zero otherwise.
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Boundary spheres of A(0, r1, r2) on a polar (n = 2) or spherical (n = 3)
/// grid. n = 2 uses `angular` cells in angle; n = 3 uses `angular` polar and
/// 2 * `angular` azimuthal cells.
GridPathProblem annulus_problem(int n, double p, double r1, double r2, int radial, int angular,
                                const WeightField* q = nullptr);

/// Paths between two disjoint cell sets of a graph, zero end offsets.
GridPathProblem set_problem(CellGraph graph, const std::vector<std::uint32_t>& set_a,
                            const std::vector<std::uint32_t>& set_b, double p);

/// Cells whose centers lie within `radius` of the polyline.
std::vector<std::uint32_t> cells_near(const CellGraph& graph, const Continuum& c, double radius);

/// Fewest cells any path from a source to a target visits.
int min_cells_crossed(const GridPathProblem& problem);

struct ShortestPath {
  std::vector<std::uint32_t> cells;
  double length = 0.0;
};

/// A rho-shortest path between the terminal sets (ties broken by index).
ShortestPath shortest_path(const GridPathProblem& problem, const std::vector<double>& rho);

/// rho-length of a given cell path including end offsets.
double path_length(const GridPathProblem& problem, const std::vector<std::uint32_t>& cells,
                   const std::vector<double>& rho);

struct SolverConfig {
  /// Relative duality gap at which the solve stops.
  double tolerance = 1e-8;
  int max_rounds = 4000;
  int max_sweeps = 200000;
  /// Inner coordinate-ascent sweeps between path searches.
  int sweeps_per_round = 5;
  bool verbose = false;
};

struct DiscreteModulusResult {
  /// Energy of an admissible density: an upper bound on the discrete modulus.
  double value = 0.0;
  /// Dual objective: a lower bound on the discrete modulus.
  double lower_bound = 0.0;
  double gap = 0.0;
  /// Admissible density (every path has rho-length >= 1).
  std::vector<double> rho;
  int rounds = 0;
  int sweeps = 0;
  std::size_t paths = 0;
  /// "iteration,objective,upper,violated" rows when verbose.
  std::string trace_csv;
};

/// min sum_c Q_c rho_c^p |c| over rho with rho-length >= 1 on every path of the
/// problem; dual coordinate ascent over path constraints generated from
/// shortest-path searches. Throws NonConvergenceError with an iterate dump
/// when the gap stays above tolerance.
DiscreteModulusResult discrete_modulus(const GridPathProblem& problem, const SolverConfig& cfg = {});

/// Three-set minorization on a grid: M(F1,F2) against
/// 3^{-p} min{M(F1,F3), M(F2,F3), M(|g13|, |g23|)}, where g13, g23 are the
/// shortest F1-F3 and F2-F3 paths under the computed extremal density of
/// (F1, F2). The cross term is +inf when the two paths share a cell.
struct MinorizationCheck {
  double m12 = 0.0;
  double m13 = 0.0;
  double m23 = 0.0;
  double m_cross = 0.0;
  double bound = 0.0;
  /// Whether the two shortest paths were both shorter than 1/3.
  bool cross_needed = false;
};

MinorizationCheck three_set_minorization(const CellGraph& graph, const std::vector<std::uint32_t>& f1,
                                         const std::vector<std::uint32_t>& f2,
                                         const std::vector<std::uint32_t>& f3, double p,
                                         const SolverConfig& cfg = {});

}  // namespace ringmod
