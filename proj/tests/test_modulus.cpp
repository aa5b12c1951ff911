#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "ringmod/discrete.hpp"
#include "ringmod/modulus.hpp"

using namespace ringmod;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

// Composite Simpson rule, enough for smooth integrands on compact intervals.
template <typename F>
double simpson(F f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Radial columns of a polar grid are disjoint and shortest, so the discrete
// modulus is the sum of independent one-dimensional problems
// min sum w_i rho_i^p s.t. sum dr rho_i = 1, whose value is
// (sum dr (dr / w_i)^{1/(p-1)})^{1-p}.
double polar_column_oracle(double p, double r1, double r2, int radial, int angular) {
  const double dr = (r2 - r1) / radial;
  const double dt = 2 * kPi / angular;
  double s = 0.0;
  for (int i = 0; i < radial; ++i) {
    const double r = r1 + (i + 0.5) * dr;
    s += dr * std::pow(dr / (r * dr * dt), 1.0 / (p - 1.0));
  }
  return angular * std::pow(s, 1.0 - p);
}

double shell_column_oracle(double p, double r1, double r2, int radial, int polar) {
  const int azimuthal = 2 * polar;
  const double dr = (r2 - r1) / radial;
  const double dth = kPi / polar;
  const double dph = 2 * kPi / azimuthal;
  double total = 0.0;
  for (int j = 0; j < polar; ++j) {
    const double band = std::cos(j * dth) - std::cos((j + 1) * dth);
    double s = 0.0;
    for (int i = 0; i < radial; ++i) {
      const double lo = r1 + i * dr;
      const double vol = (std::pow(lo + dr, 3) - std::pow(lo, 3)) / 3.0 * band * dph;
      s += dr * std::pow(dr / vol, 1.0 / (p - 1.0));
    }
    total += azimuthal * std::pow(s, 1.0 - p);
  }
  return total;
}

}  // namespace

TEST_CASE("ring_modulus_exact examples") {
  CHECK(ring_modulus_exact(2, 2, 1, kE).value == doctest::Approx(2 * kPi).epsilon(1e-14));
  CHECK(ring_modulus_exact(3, 3, 1, kE).value == doctest::Approx(4 * kPi).epsilon(1e-14));
  CHECK(ring_modulus_exact(2, 2, 1, 1e300).value < 0.01);
  CHECK(ring_modulus_exact(2, 2, 1, std::numeric_limits<double>::infinity()).value == 0.0);
  CHECK(ring_modulus_exact(2, 2, 1, kE).method == ModulusMethod::exact);
}

TEST_CASE("ring_modulus_exact for p < n matches direct integration") {
  for (auto [n, p] : {std::pair{2, 1.5}, std::pair{2, 1.9}, std::pair{3, 2.5}}) {
    const double beta = (n - 1.0) / (p - 1.0);
    const double len = simpson([beta](double t) { return std::pow(t, -beta); }, 0.5, 2.0);
    const double oracle = unit_sphere_area(n) * std::pow(len, 1.0 - p);
    CHECK(ring_modulus_exact(n, p, 0.5, 2.0).value == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("ring_modulus_exact is strictly decreasing in r2/r1") {
  for (double p : {1.5, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double r2 = 1.1; r2 < 100.0; r2 *= 1.3) {
      const double v = ring_modulus_exact(2, p, 1.0, r2).value;
      CHECK(v < prev);
      prev = v;
    }
  }
  CHECK_THROWS_AS(ring_modulus_exact(2, 2, 2, 1), InputError);
  CHECK_THROWS_AS(ring_modulus_exact(2, 1.0, 1, 2), InputError);
  CHECK_THROWS_AS(ring_modulus_exact(3, 2.5, 0, 2), InputError);
}

TEST_CASE("eta0_weighted_bound examples") {
  QuadratureConfig cfg;
  const auto one = eta0_weighted_bound(WeightField::constant(2, 1.0), Vec{0, 0}, 1, kE, cfg);
  CHECK(one.J == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(one.bound == doctest::Approx(2 * kPi).epsilon(1e-13));
  const auto sixteen = eta0_weighted_bound(WeightField::constant(3, 16.0), Vec{0, 0, 0}, 1, kE, cfg);
  CHECK(sixteen.J == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(sixteen.bound == doctest::Approx(64 * kPi).epsilon(1e-13));
  // Sphere quadrature path gives the same.
  const auto sq = eta0_weighted_bound(WeightField::constant(3, 16.0).without_profile(), Vec{0, 0, 0}, 1, kE, cfg);
  CHECK(sq.bound == doctest::Approx(64 * kPi).epsilon(1e-12));
  // Vanishing weight: J infinite, bound 0.
  const auto zero = eta0_weighted_bound(WeightField::constant(2, 0.0), Vec{0, 0}, 1, 2, cfg);
  CHECK(std::isinf(zero.J));
  CHECK(zero.bound == 0.0);
}

TEST_CASE("eta0 identity holds for random radial polynomial weights") {
  QuadratureConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(0.0, 3.0);
  for (int n : {2, 3, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto prof = QProfile::polynomial({coef(rng) + 0.05, coef(rng), coef(rng), coef(rng)});
      const auto q = WeightField::radial(n, Vec(static_cast<std::size_t>(n), 0.0), prof);
      const auto id = eta0_identity(q, Vec(static_cast<std::size_t>(n), 0.0), 0.2, 1.7, cfg);
      CHECK(id.relative_error < 1e-4);
      // J against an independent Simpson integration.
      const double J = simpson([&](double r) { return 1.0 / (r * std::pow(prof(r), 1.0 / (n - 1))); }, 0.2, 1.7);
      CHECK(unit_sphere_area(n) / std::pow(J, n - 1) == doctest::Approx(id.bound).epsilon(1e-8));
    }
  }
}

TEST_CASE("eta0 identity through sphere quadrature for a non-radial weight") {
  QuadratureConfig cfg;
  const auto q = WeightField(2, [](std::span<const double> y) { return 1.0 + y[0] * y[0] + 0.5 * y[1]; });
  const auto id = eta0_identity(q, Vec{0, 0}, 0.1, 1.0, cfg);
  CHECK(id.relative_error < 1e-4);
}

TEST_CASE("caraman_lower_bound examples") {
  CHECK(caraman_lower_bound(2, 1.5, 1, 1) == 0.0);
  CHECK(caraman_lower_bound(2, 1.5, 1, 2, 1) == doctest::Approx(8 * (std::sqrt(2.0) - 1)).epsilon(1e-15));
  double prev = 0.0;
  for (double b = 1.1; b < 10; b += 0.7) {
    const double v = caraman_lower_bound(3, 2.4, 1, b, 0.3);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(caraman_lower_bound(2, 2.0, 1, 2), InputError);
  CHECK_THROWS_AS(caraman_lower_bound(2, 1.5, 1, 2, 0.0), InputError);
}

TEST_CASE("spheres_meet_both uses the exact radius range of a polyline") {
  const Vec o{0.0, 0.0};
  // A chord passing at distance 0.5 from the origin: radii sweep [0.5, sqrt(1.25)].
  const auto chord = Continuum::segment({-1.0, 0.5}, {1.0, 0.5});
  const auto ray = Continuum::segment({0.0, -0.2}, {0.0, -3.0});
  CHECK(spheres_meet_both(chord, ray, o, 0.5, 1.1));
  CHECK_FALSE(spheres_meet_both(chord, ray, o, 0.4, 1.1));
  CHECK_FALSE(spheres_meet_both(chord, ray, o, 0.5, 1.2));
}

TEST_CASE("loewner_lower_bound examples") {
  CHECK(loewner_lower_bound(2, 2, 3.0, 0.0, 1.0) == 0.0);
  CHECK(loewner_lower_bound(3, 3, 2.0, 1.0, 4.0, 2.0) == doctest::Approx(1.0 / 4.0));
  const double a = loewner_lower_bound(3, 2.5, 1.7, 0.3, 0.4, 1.3);
  CHECK(loewner_lower_bound(3, 2.5, 1.7, 0.6, 0.8, 1.3) == doctest::Approx(2 * a));
  CHECK_THROWS_AS(loewner_lower_bound(2, 2, 0.0, 1, 1), InputError);
}

TEST_CASE("minorization_bound examples") {
  CHECK(minorization_bound(5, 5, 5, 1.5) == doctest::Approx(5 * std::pow(3.0, -1.5)));
  CHECK(minorization_bound(0, 2, 3, 2) == 0.0);
  CHECK(minorization_bound(1, 2, 3, 2) == doctest::Approx(1.0 / 9.0));
  CHECK(minorization_bound_ring(100, 100, 2, 1.5, 1, 2) ==
        doctest::Approx(8 * (std::sqrt(2.0) - 1) * std::pow(3.0, -1.5)));
}

TEST_CASE("grid builders") {
  const auto g = polar_annulus_grid({0, 0}, 1, 2, 4, 8);
  CHECK(g.size() == 32);
  double area = 0.0;
  for (double m : g.measure) area += m;
  CHECK(area == doctest::Approx(3 * kPi).epsilon(1e-14));
  // Inner ring cells have 5 neighbours, interior cells 8.
  CHECK(g.offsets[1] - g.offsets[0] == 5);
  CHECK(g.offsets[9] - g.offsets[8] == 8);

  const auto s = spherical_shell_grid({0, 0, 0}, 1, 2, 3, 4, 8);
  double vol = 0.0;
  for (double m : s.measure) vol += m;
  CHECK(vol == doctest::Approx(4.0 * kPi / 3.0 * 7.0).epsilon(1e-13));

  const auto b = box_grid({0, 0}, {1, 2}, {4, 8});
  CHECK(b.size() == 32);
  CHECK(b.offsets[1] - b.offsets[0] == 3);
  const auto b3 = box_grid({0, 0, 0}, {1, 1, 1}, {3, 3, 3});
  CHECK(b3.offsets[14] - b3.offsets[13] == 26);
}

TEST_CASE("every annulus path crosses at least ceil((r2 - r1) / h) cells") {
  for (int radial : {16, 24, 40}) {
    const auto pb = annulus_problem(2, 2, 1, kE, radial, 32);
    CHECK(min_cells_crossed(pb) >= static_cast<int>(std::ceil((kE - 1) / pb.spacing - 1e-9)));
  }
  const auto pb3 = annulus_problem(3, 3, 1, 2, 16, 6);
  CHECK(min_cells_crossed(pb3) >= 16);
  CHECK_THROWS_AS(annulus_problem(2, 2, 1, 2, 8, 32), InputError);
}

TEST_CASE("discrete annulus modulus equals the column oracle and approximates 2 pi") {
  for (int radial : {16, 32, 64}) {
    const auto pb = annulus_problem(2, 2, 1, kE, radial, 4 * radial);
    const auto res = discrete_modulus(pb);
    CHECK(res.gap <= 1e-8);
    CHECK(res.value == doctest::Approx(polar_column_oracle(2, 1, kE, radial, 4 * radial)).epsilon(1e-8));
    CHECK(std::abs(res.value - 2 * kPi) / (2 * kPi) < 0.05);
    CHECK(res.lower_bound <= res.value * (1 + 1e-12));
  }
}

TEST_CASE("discrete annulus modulus for p = 1.5 and n = 3") {
  {
    const auto pb = annulus_problem(2, 1.5, 1, 2, 32, 64);
    const auto res = discrete_modulus(pb);
    CHECK(res.value == doctest::Approx(polar_column_oracle(1.5, 1, 2, 32, 64)).epsilon(1e-7));
    CHECK(std::abs(res.value / ring_modulus_exact(2, 1.5, 1, 2).value - 1) < 0.01);
  }
  {
    const auto pb = annulus_problem(3, 3, 1, kE, 16, 8);
    const auto res = discrete_modulus(pb);
    CHECK(res.value == doctest::Approx(shell_column_oracle(3, 1, kE, 16, 8)).epsilon(1e-7));
    CHECK(std::abs(res.value / (4 * kPi) - 1) < 0.05);
  }
}

TEST_CASE("discrete annulus refinement is Cauchy") {
  double prev = 0.0;
  double prev_change = std::numeric_limits<double>::infinity();
  for (int radial : {16, 32, 64, 128}) {
    const double v = discrete_modulus(annulus_problem(2, 2, 1, kE, radial, 64)).value;
    if (prev > 0.0) {
      const double change = std::abs(v - prev);
      CHECK(change < prev_change);
      prev_change = change;
    }
    prev = v;
  }
}

TEST_CASE("admissible density from the solver has rho-length >= 1 on shortest paths") {
  const auto pb = annulus_problem(2, 2, 1, 3, 16, 32);
  const auto res = discrete_modulus(pb);
  const auto sp = shortest_path(pb, res.rho);
  CHECK(sp.length >= 1.0 - 1e-12);
  CHECK(path_length(pb, sp.cells, res.rho) == doctest::Approx(sp.length).epsilon(1e-14));
}

TEST_CASE("weighted annulus: constant weight scales the modulus") {
  const auto q = WeightField::constant(2, 3.0);
  const auto pb = annulus_problem(2, 2, 1, kE, 16, 32, &q);
  const double base = discrete_modulus(annulus_problem(2, 2, 1, kE, 16, 32)).value;
  CHECK(discrete_modulus(pb).value == doctest::Approx(3 * base).epsilon(1e-9));
}

TEST_CASE("two separated continua keep a positive modulus under refinement") {
  const auto e = Continuum::segment({0.2, 0.2}, {0.2, 0.8});
  const auto f = Continuum::segment({0.8, 0.3}, {0.7, 0.8});
  std::vector<double> values;
  for (int cells : {12, 24, 48}) {
    auto g = box_grid({0, 0}, {1, 1}, {cells, cells});
    const double h = 1.0 / cells;
    const auto a = cells_near(g, e, 0.5 * h * std::sqrt(2.0));
    const auto b = cells_near(g, f, 0.5 * h * std::sqrt(2.0));
    SolverConfig cfg;
    cfg.tolerance = 1e-5;
    values.push_back(discrete_modulus(set_problem(std::move(g), a, b, 2.0), cfg).value);
  }
  for (double v : values) CHECK(v > 0.5 * values.front());
}

TEST_CASE("touching sets: the estimate grows with refinement") {
  std::vector<double> values;
  for (int cells : {8, 16, 32}) {
    auto g = box_grid({0, 0}, {1, 1}, {cells, cells});
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (std::uint32_t c = 0; c < g.size(); ++c) {
      const auto& x = g.centers[c];
      if (x[1] < 0.25 || x[1] > 0.75) continue;
      (x[0] < 0.5 ? left : right).push_back(c);
    }
    SolverConfig cfg;
    cfg.tolerance = 1e-5;
    values.push_back(discrete_modulus(set_problem(std::move(g), left, right, 2.0), cfg).value);
  }
  CHECK(values[1] > 1.5 * values[0]);
  CHECK(values[2] > 1.5 * values[1]);
}

TEST_CASE("solver reports non-convergence with an iterate dump") {
  SolverConfig cfg;
  cfg.max_rounds = 1;
  try {
    discrete_modulus(annulus_problem(2, 2, 1, kE, 16, 32), cfg);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(std::string(e.dump()).find("round=") != std::string::npos);
  }
}

TEST_CASE("verbose trace is CSV") {
  SolverConfig cfg;
  cfg.verbose = true;
  const auto res = discrete_modulus(annulus_problem(2, 2, 1, kE, 16, 32), cfg);
  CHECK(res.trace_csv.rfind("iteration,objective,upper,violated\n", 0) == 0);
  CHECK(res.trace_csv.find("\n1,") != std::string::npos);
}

TEST_CASE("three-set minorization holds on random grid instances") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  const int cells = 16;
  int done = 0;
  while (done < 4) {
    auto g = box_grid({0, 0}, {1, 1}, {cells, cells});
    std::vector<std::vector<std::uint32_t>> sets;
    for (int k = 0; k < 3; ++k) {
      sets.push_back(cells_near(g, Continuum::segment({u(rng), u(rng)}, {u(rng), u(rng)}), 0.5 / cells));
    }
    std::set<std::uint32_t> seen;
    bool disjoint = true;
    for (const auto& s : sets) {
      disjoint = disjoint && !s.empty();
      for (auto c : s) disjoint = disjoint && seen.insert(c).second;
    }
    if (!disjoint) continue;
    const double p = done % 2 ? 1.5 : 2.0;
    SolverConfig cfg;
    cfg.tolerance = 1e-5;
    const auto r = three_set_minorization(g, sets[0], sets[1], sets[2], p, cfg);
    CHECK(r.m12 >= r.bound - cfg.tolerance * r.m12);
    ++done;
  }
}
