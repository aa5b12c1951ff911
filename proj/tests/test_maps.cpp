#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ringmod/errors.hpp"
#include "ringmod/maps.hpp"

using namespace ringmod;

namespace {

constexpr double kE = std::numbers::e;

// Chordal distance between the origin and a point at radius s.
double chord_from_origin(double s) { return s / std::sqrt(1.0 + s * s); }

// Composite Simpson on [a, b] in log t, used as an independent integral oracle.
double simpson_log(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  const double la = std::log(a);
  const double lb = std::log(b);
  const double h = (lb - la) / panels;
  double s = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double u = la + i * h;
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * f(std::exp(u)) * std::exp(u);
  }
  return s * h / 3.0;
}

std::vector<Vec> random_ball_points(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < count) {
    Vec x(static_cast<std::size_t>(n));
    for (double& c : x) c = gauss(rng);
    const double r = norm(x);
    const double target = 0.999 * std::pow(unif(rng), 1.0 / n);
    for (double& c : x) c *= target / r;
    out.push_back(x);
  }
  return out;
}

double max_diff(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// q(t) = 1 + log(1/t): no closed form for G, so the table is exercised.
QProfile log_profile() { return QProfile::logarithmic(1.0, kE); }

}  // namespace

TEST_CASE("profile: q = 1 gives rho(r) = r on both branches") {
  struct Case { double p; int n; };
  for (Case c : {Case{2, 2}, Case{1.5, 2}, Case{1.9, 2}, Case{3, 3}, Case{2.5, 3}}) {
    const auto prof = RadialProfile::build(QProfile::constant(1.0), c.p, c.n);
    CHECK(prof.closed_form());
    for (const auto& [r, rho] : prof.grid()) CHECK(std::abs(rho - r) <= 1e-12 * std::max(r, 1e-300) + 1e-300);
    CHECK(prof.rho(1.0) == 1.0);
    CHECK(prof.rho(0.0) == 0.0);
  }
}

TEST_CASE("profile: q = 1 tabulated through a custom profile also gives r") {
  const QProfile one = QProfile::custom([](double) { return 1.0; }, "one");
  for (double p : {2.0, 1.5}) {
    const auto prof = RadialProfile::build(one, p, 2);
    CHECK_FALSE(prof.closed_form());
    double worst = 0.0;
    for (const auto& [r, rho] : prof.grid()) worst = std::max(worst, std::abs(rho - r) / r);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("profile: q(t) = 1/t at n = p = 2 gives exp(r - 1)") {
  const auto prof = RadialProfile::build(QProfile::power(1.0, -1.0), 2.0, 2);
  for (double r : {1e-9, 0.01, 0.3, 0.77, 1.0}) {
    CHECK(prof.G(r) == doctest::Approx(1.0 - r).epsilon(1e-14));
    CHECK(prof.rho(r) == doctest::Approx(std::exp(r - 1.0)).epsilon(1e-14));
  }
  CHECK(prof.G_at_zero() == doctest::Approx(1.0));
  CHECK(prof.rho_inverse(0.5) == doctest::Approx(1.0 + std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("profile: p < n telescoping against the closed form") {
  // q = 1: G(r) = (r^{-gamma} - 1) / gamma.
  for (double p : {1.5, 1.9}) {
    const double g = (2.0 - p) / (p - 1.0);
    const auto prof = RadialProfile::build(QProfile::constant(1.0), p, 2);
    for (double r : {0.001, 0.1, 0.5}) CHECK(prof.G(r) == doctest::Approx((std::pow(r, -g) - 1.0) / g).epsilon(1e-13));
    CHECK(std::isinf(prof.G_at_zero()));
  }
}

TEST_CASE("profile: tabulated G matches an independent Simpson integral") {
  for (double p : {2.0, 1.6}) {
    const int n = 2;
    const QProfile q = log_profile();
    const auto prof = RadialProfile::build(q, p, n);
    const auto f = [&](double t) { return 1.0 / (std::pow(t, (n - 1.0) / (p - 1.0)) * std::pow(q(t), 1.0 / (p - 1.0))); };
    for (double r : {1e-6, 1e-3, 0.2, 0.9}) {
      CHECK(prof.G(r) == doctest::Approx(simpson_log(f, r, 1.0)).epsilon(1e-8));
    }
  }
}

TEST_CASE("profile: rho is strictly increasing and inverse-consistent across the grid") {
  const std::vector<QProfile> profiles = {QProfile::constant(3.0), QProfile::power(2.0, -0.5), log_profile(),
                                          QProfile::polynomial({1.0, 2.0, 0.5})};
  for (const QProfile& q : profiles) {
    for (double p : {2.0, 1.7}) {
      for (int m : {MapIndex::limit, 1, 10, 1000}) {
        const auto prof = RadialProfile::build(q, p, 2, m);
        const auto g = prof.grid();
        double prev = -1.0;
        for (const auto& [r, rho] : g) {
          CHECK(rho > prev);
          prev = rho;
          if (rho > 0.0) CHECK(std::abs(prof.rho_inverse(rho) - r) <= 1e-8 * r);
        }
      }
    }
  }
}

TEST_CASE("maps: identity collapse for q = 1 on random points") {
  struct Case { double p; int n; };
  for (Case c : {Case{2, 2}, Case{1.5, 2}, Case{1.9, 2}, Case{2.5, 3}, Case{3, 3}}) {
    const RadialMapFamily fam(RadialProfile::build(QProfile::constant(1.0), c.p, c.n));
    const auto pts = random_ball_points(c.n, 10000, 42);
    for (int m : {1, 10, 100}) {
      double worst = 0.0;
      for (const Vec& x : pts) worst = std::max(worst, max_diff(fam.eval(m, x), x));
      CHECK(worst <= 1e-10);
    }
  }
}

TEST_CASE("maps: x = 0 maps to 0 and |x| >= 1 is a domain error") {
  const RadialMapFamily fam(RadialProfile::build(QProfile::power(1.0, -1.0), 2.0, 2));
  CHECK(fam.eval(3, Vec{0.0, 0.0}) == Vec{0.0, 0.0});
  CHECK_THROWS_AS(fam.eval(3, Vec{1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(fam.eval(3, Vec{0.1, 0.1, 0.1}), InputError);
}

TEST_CASE("maps: q(t) = 1/t closed-form constants and branches") {
  const RadialMapFamily fam(RadialProfile::build(QProfile::power(1.0, -1.0), 2.0, 2));
  for (int m : {1, 2, 5, 100}) {
    CHECK(fam.I(m) == doctest::Approx(1.0 - 1.0 / m).epsilon(1e-14));
    CHECK(fam.threshold(m) == doctest::Approx(std::exp(1.0 / m - 1.0)).epsilon(1e-14));
  }
  CHECK(fam.I0() == doctest::Approx(1.0));
  // f_1 is the identity.
  for (double r : {0.05, 0.4, 0.95}) CHECK(fam.eval(1, Vec{r, 0.0})[0] == doctest::Approx(r).epsilon(1e-14));
  // Inner branch: x e^{I_m} / m.
  CHECK(fam.eval(4, Vec{0.1, 0.0})[0] == doctest::Approx(0.1 * std::exp(0.75) / 4).epsilon(1e-14));
  // Outer branch: 1 + log |x|.
  CHECK(fam.eval(4, Vec{0.0, 0.9})[1] == doctest::Approx(1.0 + std::log(0.9)).epsilon(1e-14));
  // Limit map kills the ball of radius 1/e.
  for (double r : {0.0, 0.1, 0.3, 1.0 / kE}) CHECK(norm(fam.eval(MapIndex::limit, Vec{r, 0.0})) == 0.0);
  CHECK(norm(fam.eval(MapIndex::limit, Vec{0.5, 0.0})) > 0.0);
}

TEST_CASE("maps: seam continuity on all branches") {
  const std::vector<QProfile> profiles = {QProfile::power(1.0, -1.0), QProfile::constant(2.0), log_profile()};
  for (const QProfile& q : profiles) {
    for (double p : {2.0, 1.5, 1.9}) {
      const RadialMapFamily fam(RadialProfile::build(q, p, 2));
      for (int m : {2, 7, 50}) {
        const double s = fam.threshold(m);
        const double below = fam.eval(m, Vec{std::nextafter(s, 0.0), 0.0})[0];
        const double at = fam.eval(m, Vec{s, 0.0})[0];
        // The outer branch at the seam lands on 1/m.
        CHECK(at == doctest::Approx(1.0 / m).epsilon(1e-10));
        CHECK(std::abs(below - at) <= 1e-10);
      }
    }
  }
  // p < n threshold equals J_m.
  const RadialMapFamily gen(RadialProfile::build(QProfile::constant(1.0), 1.5, 2));
  CHECK(gen.J(10) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(RadialMapFamily(RadialProfile::build(QProfile::constant(1.0), 2.0, 2)).J(3), InputError);
}

TEST_CASE("maps: f_m inverts g_m on random points") {
  for (double p : {2.0, 1.6}) {
    const RadialMapFamily fam(RadialProfile::build(log_profile(), p, 2));
    const auto pts = random_ball_points(2, 2000, 7);
    for (int m : {1, 3, 40}) {
      double worst = 0.0;
      for (const Vec& x : pts) worst = std::max(worst, max_diff(fam.forward(m, fam.eval(m, x)), x));
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("maps: rotation equivariance") {
  const RadialMapFamily fam(RadialProfile::build(QProfile::power(1.0, -1.5), 2.5, 3));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    // Random 3D rotation from a unit quaternion.
    double qa = gauss(rng), qb = gauss(rng), qc = gauss(rng), qd = gauss(rng);
    const double qn = std::sqrt(qa * qa + qb * qb + qc * qc + qd * qd);
    qa /= qn; qb /= qn; qc /= qn; qd /= qn;
    const double R[3][3] = {
        {1 - 2 * (qc * qc + qd * qd), 2 * (qb * qc - qa * qd), 2 * (qb * qd + qa * qc)},
        {2 * (qb * qc + qa * qd), 1 - 2 * (qb * qb + qd * qd), 2 * (qc * qd - qa * qb)},
        {2 * (qb * qd - qa * qc), 2 * (qc * qd + qa * qb), 1 - 2 * (qb * qb + qc * qc)}};
    const auto rot = [&](const Vec& v) {
      Vec o(3, 0.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) o[i] += R[i][j] * v[j];
      return o;
    };
    const Vec x = random_ball_points(3, 1, 100 + trial).front();
    for (int m : {1, 5, MapIndex::limit}) {
      CHECK(max_diff(fam.eval(m, rot(x)), rot(fam.eval(m, x))) <= 1e-15);
    }
  }
}

TEST_CASE("maps: monotone collapse of a fixed continuum") {
  for (double a : {0.5, 1.0, 2.0}) {
    for (int n : {2, 3}) {
      const QProfile q = QProfile::power(1.0, -(n - 1) * a);
      const RadialMapFamily fam(RadialProfile::build(q, n, n));
      const double R = fam.threshold(MapIndex::limit);
      REQUIRE(R > 0.0);
      Vec tip(static_cast<std::size_t>(n), 0.0);
      tip[0] = 0.9 * R;
      Vec side(static_cast<std::size_t>(n), 0.0);
      side[1] = -0.5 * R;
      const Continuum c({ExtendedPoint::finite(side), ExtendedPoint::origin(n), ExtendedPoint::finite(tip)});
      double prev = chordal_diameter(pushforward(fam, 1, c));
      for (int m = 2; m <= 200; ++m) {
        const double d = chordal_diameter(pushforward(fam, m, c));
        CHECK(d <= prev + 1e-12);
        prev = d;
      }
      CHECK(prev < 0.05);
    }
  }
}

TEST_CASE("pushforward: identity family leaves a continuum unchanged") {
  const RadialMapFamily fam(RadialProfile::build(QProfile::constant(1.0), 2.0, 2));
  const Continuum c = Continuum::arc(2, 0.5, 0.0, 2.0, 9);
  const Continuum img = pushforward(fam, 17, c);
  REQUIRE(img.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(max_diff(img.vertices()[i].coords(), c.vertices()[i].coords()) <= 1e-12);
}

TEST_CASE("collapse experiment: q(t) = 1/t example against the closed forms") {
  const Continuum c = Continuum::segment({0.0, 0.0}, {0.5 / kE, 0.0});
  const ExtendedPoint a = ExtendedPoint::finite({0.9, 0.0});
  const ExtendedPoint b = ExtendedPoint::finite({-0.9, 0.0});
  std::vector<int> ms;
  for (int m = 2; m <= 1024; m *= 2) ms.push_back(m);
  const auto rep = collapse_experiment(QProfile::power(1.0, -1.0), 2.0, 2, c, a, b, ms);
  CHECK(rep.verdict.verdict == Verdict::converges);
  CHECK(rep.collapse_radius == doctest::Approx(1.0 / kE));
  CHECK(rep.diameters_strictly_decreasing);
  CHECK(rep.ab_constant_from == 2);
  const double s = 1.0 + std::log(0.9);
  const double ab = 2.0 * s / (1.0 + s * s);
  CHECK(rep.realized_delta == doctest::Approx(ab).epsilon(1e-14));
  for (const auto& row : rep.rows) {
    const double tip = std::exp(-1.0 / row.m) / (2.0 * row.m);
    CHECK(row.image_diameter == doctest::Approx(chord_from_origin(tip)).epsilon(1e-13));
    CHECK(row.ab_distance == doctest::Approx(ab).epsilon(1e-14));
    CHECK(row.image_diameter * row.m < 0.5);
  }
  const std::string csv = collapse_csv(rep);
  CHECK(csv.rfind("m,h_image_diam,h_ab\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(ms.size()) + 1);
  CHECK(collapse_svg(rep).find("<svg") == 0);
}

TEST_CASE("collapse experiment: refusals") {
  const Continuum c = Continuum::segment({0.0, 0.0}, {0.1, 0.0});
  const ExtendedPoint a = ExtendedPoint::finite({0.9, 0.0});
  const ExtendedPoint b = ExtendedPoint::finite({-0.9, 0.0});
  CHECK_THROWS_AS(collapse_experiment(QProfile::constant(1.0), 2.0, 2, c, a, b, {2, 4}), RefusalError);
  const Continuum wide = Continuum::segment({0.0, 0.0}, {0.5, 0.0});
  CHECK_THROWS_AS(collapse_experiment(QProfile::power(1.0, -1.0), 2.0, 2, wide, a, b, {2, 4}), RefusalError);
  const ExtendedPoint inner = ExtendedPoint::finite({0.2, 0.0});
  CHECK_THROWS_AS(collapse_experiment(QProfile::power(1.0, -1.0), 2.0, 2, c, inner, b, {2, 4}), RefusalError);
  CHECK_THROWS_AS(collapse_experiment(QProfile::power(1.0, -1.0), 2.0, 2, c, a, b, {4, 2}), InputError);
}

TEST_CASE("build_profile: input and degenerate-profile errors") {
  CHECK_THROWS_AS(RadialProfile::build(QProfile::constant(1.0), 1.0, 2), InputError);
  CHECK_THROWS_AS(RadialProfile::build(QProfile::constant(1.0), 2.5, 2), InputError);
  CHECK_THROWS_AS(RadialProfile::build(QProfile::constant(0.0), 2.0, 2), DomainError);
  const QProfile gap = QProfile::custom([](double t) { return (t > 0.2 && t < 0.4) ? 0.0 : 1.0; }, "gap");
  CHECK_THROWS_AS(RadialProfile::build(gap, 2.0, 2), DomainError);
}

TEST_CASE("equicontinuity: identity family and the annulus point") {
  const RadialMapFamily id(RadialProfile::build(QProfile::constant(1.0), 2.0, 2));
  const Vec x0 = {0.3, 0.1};
  const std::vector<double> radii = {0.1, 0.01, 0.001};
  const auto tr = equicontinuity_modulus({{id, 1}, {id, 50}}, x0, radii);
  REQUIRE(tr.size() == 3);
  for (const auto& pt : tr) {
    // h(x, x0) on the boundary circle is bracketed by the extreme values of |x|.
    const double near = std::max(norm(x0) - pt.cutoff, 0.0);
    CHECK(pt.partial <= pt.cutoff / std::sqrt((1.0 + norm(x0) * norm(x0)) * (1.0 + near * near)));
    CHECK(pt.partial >= pt.cutoff / std::sqrt((1.0 + norm(x0) * norm(x0)) * (1.0 + std::pow(norm(x0) + pt.cutoff, 2))));
  }

  const RadialMapFamily fam(RadialProfile::build(QProfile::power(1.0, -1.0), 2.0, 2));
  std::vector<MapMember> members;
  for (int m : {2, 8, 64, 1024}) members.push_back({fam, m});
  const auto t2 = equicontinuity_modulus(members, Vec{0.8, 0.0}, {0.1, 0.01, 0.001, 1e-4});
  for (std::size_t i = 1; i < t2.size(); ++i) CHECK(t2[i].partial < t2[i - 1].partial);
  CHECK(t2.back().partial < 1e-3);
}
