#include <cmath>
#include <numbers>

#include "agg/errors.hpp"
#include "agg/green.hpp"
#include "agg/rng.hpp"
#include "doctest.h"

using namespace agg;

namespace {

constexpr double kPi = std::numbers::pi;

/// Midpoint rule for ∫_Q -(2/π)log|x - y| dy on an n×n grid.
double box_potential_midpoint(const Point& lo, const Point& hi, const Point& x, int n) {
  const double hx = (hi[0] - lo[0]) / n;
  const double hy = (hi[1] - lo[1]) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double px = lo[0] + (i + 0.5) * hx;
      const double py = lo[1] + (j + 0.5) * hy;
      s += -(2.0 / kPi) * std::log(std::hypot(px - x[0], py - x[1]));
    }
  }
  return s * hx * hy;
}

}  // namespace

TEST_CASE("potential kernel closed-form values") {
  CHECK(potential_kernel_2d(0, 0) == 0.0);
  CHECK(potential_kernel_2d(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(potential_kernel_2d(0, -1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(potential_kernel_2d(1, 1) == doctest::Approx(4.0 / kPi).epsilon(1e-12));
  CHECK(potential_kernel_2d(2, 0) == doctest::Approx(4.0 - 8.0 / kPi).epsilon(1e-12));
  CHECK(potential_kernel_2d(2, 1) == doctest::Approx(8.0 / kPi - 1.0).epsilon(1e-12));
  CHECK(potential_kernel_2d(-2, 2) == doctest::Approx(16.0 / (3.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("potential kernel is harmonic off the origin with unit Laplacian at it") {
  const auto& table = kernel_table(2);
  auto a = [](int x, int y) { return potential_kernel_2d(x, y); };
  CHECK((a(1, 0) + a(-1, 0) + a(0, 1) + a(0, -1)) / 4.0 - a(0, 0) == doctest::Approx(1.0));
  double worst = 0.0;
  for (int x = 0; x < table.radius(); x += 3) {
    for (int y = 0; y < table.radius(); y += 5) {
      if (x == 0 && y == 0) continue;
      const double mean = (a(x + 1, y) + a(x - 1, y) + a(x, y + 1) + a(x, y - 1)) / 4.0;
      worst = std::max(worst, std::abs(mean - a(x, y)));
    }
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("far-field constants") {
  const auto& info = kernel_table(2).info();
  CHECK(info.kappa == doctest::Approx((2.0 * std::numbers::egamma + std::log(8.0)) / kPi).epsilon(1e-9));
  CHECK(info.correction == doctest::Approx(-1.0 / (6.0 * kPi)).epsilon(1e-4));
  CHECK(info.fit_residual < 1e-9);
}

TEST_CASE("kernel beyond the table continues the tabulated values") {
  const auto& table = kernel_table(2);
  const int r = table.radius();
  const Coord edge = make_coord({r, 7});
  CHECK(table.far_field(edge) == doctest::Approx(table.table_value(edge)).epsilon(1e-11));
  const double inside = potential_kernel_2d(r, 0);
  const double outside = potential_kernel_2d(r + 1, 0);
  CHECK(outside > inside);
  CHECK(outside - inside == doctest::Approx((2.0 / kPi) * std::log((r + 1.0) / r)).epsilon(1e-4));
}

TEST_CASE("three-dimensional Green's function") {
  const auto& table = kernel_table(3);
  // Expected visits to the origin of simple random walk on Z^3.
  CHECK(table(Coord{}) == doctest::Approx(1.516386059151978).epsilon(1e-7));
  const double mean = (table(make_coord({1, 0, 0})) * 6.0) / 6.0;
  CHECK(mean - table(Coord{}) == doctest::Approx(-1.0).epsilon(1e-9));
  const Coord x = make_coord({5, 3, 2});
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int sign : {1, -1}) {
      Coord y = x;
      y[a] += sign;
      s += table(y);
    }
  }
  CHECK(s / 6.0 == doctest::Approx(table(x)).epsilon(1e-9));
  const double far = table(make_coord({40, 0, 0}));
  CHECK(far == doctest::Approx(kernel_constant(3) / 40.0).epsilon(2e-3));
}

TEST_CASE("kernel table save and load round trip") {
  const auto built = KernelTable::build(2, 12);
  const auto path = std::filesystem::temp_directory_path() / "agg_test_kernel.gkt";
  built.save(path);
  const auto loaded = KernelTable::load(path);
  CHECK(loaded.radius() == 12);
  CHECK(loaded.values() == built.values());
  CHECK(loaded.info().kappa == doctest::Approx(built.info().kappa));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("box potential matches midpoint quadrature") {
  const Point lo = make_point({-0.3, 0.1});
  const Point hi = make_point({0.5, 0.6});
  for (const Point& x : {make_point({2.0, -1.0}), make_point({0.0, 0.35}), make_point({0.5, 0.6})}) {
    CHECK(box_potential(lo, hi, x, 2) == doctest::Approx(box_potential_midpoint(lo, hi, x, 800)).epsilon(1e-4));
  }
  const Point far = make_point({40.0, 25.0});
  const double area = 0.8 * 0.5;
  const Point c = make_point({0.1, 0.35});
  CHECK(box_potential(lo, hi, far, 2) == doctest::Approx(area * continuum_kernel(c, far, 2)).epsilon(1e-6));
}

TEST_CASE("ball potential obeys Newton's theorem outside") {
  for (int d : {2, 3}) {
    const Point c = make_point({0.2, -0.1, 0.3});
    const double r = 0.7;
    const double volume = unit_ball_volume(d) * std::pow(r, d);
    const Point x = make_point({1.5, 0.4, -0.2});
    CHECK(ball_potential(c, r, x, d) == doctest::Approx(volume * continuum_kernel(c, x, d)));
    Point edge = c;
    edge[0] += r;
    Point just_in = edge;
    just_in[0] -= 1e-7;
    CHECK(ball_potential(c, r, just_in, d) == doctest::Approx(ball_potential(c, r, edge, d)).epsilon(1e-6));
  }
}

TEST_CASE("three-dimensional box potential agrees with a ball far away") {
  const Point lo = make_point({-0.2, -0.2, -0.2});
  const Point hi = make_point({0.2, 0.2, 0.2});
  const Point x = make_point({3.0, 1.0, 0.5});
  CHECK(box_potential(lo, hi, x, 3) == doctest::Approx(0.064 * continuum_kernel(Point{}, x, 3)).epsilon(1e-4));
}

TEST_CASE("discrete potential inverts the Laplacian") {
  const auto spec = LatticeSpec::centered(2, 0.5, 10);
  ScalarField sigma(spec);
  RngStream rng(5, 0);
  for_each_site_in(spec, make_coord({-3, -3}), make_coord({3, 3}),
                   [&](std::size_t i, const Coord&) { sigma[i] = rng.uniform(); });
  const ScalarField pot = discrete_potential(sigma);
  const ScalarField lap = discrete_laplacian(pot);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!spec.on_frame(i)) CHECK(lap[i] == doctest::Approx(-sigma[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("lattice kernel scaling") {
  const LatticeSpec spec2 = LatticeSpec::centered(2, 0.1, 5);
  CHECK(lattice_kernel(spec2, make_coord({3, 1})) ==
        doctest::Approx(-potential_kernel_2d(3, 1) + (2.0 / kPi) * std::log(0.1)));
  const LatticeSpec spec3 = LatticeSpec::centered(3, 0.1, 5);
  CHECK(lattice_kernel(spec3, make_coord({2, 1, 0})) == doctest::Approx(10.0 * kernel_table(3)(make_coord({2, 1, 0}))));
}

TEST_CASE("cell-region potential field equals a sum of box potentials") {
  const auto spec = LatticeSpec::centered(2, 0.1, 12);
  DomainMask cells(spec);
  cells.at(make_coord({0, 0})) = 1;
  cells.at(make_coord({1, 0})) = 1;
  cells.at(make_coord({-2, 3})) = 1;
  ContinuumDensity sigma(2);
  sigma.add(1.5, ContinuumSet::cells(cells));
  const ScalarField field = continuum_potential_field(sigma, spec);
  for (const Coord& probe : {make_coord({0, 0}), make_coord({5, -7}), make_coord({-12, 12})}) {
    double expected = 0.0;
    for (const Coord& c : sites_of(cells)) {
      const Point p = spec.point(c);
      expected += 1.5 * box_potential(make_point({p[0] - 0.05, p[1] - 0.05}), make_point({p[0] + 0.05, p[1] + 0.05}),
                                      spec.point(probe), 2);
    }
    CHECK(field.at(probe) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("smoothing conserves mass away from the edge") {
  const auto spec = LatticeSpec::centered(2, 1.0, 10);
  ScalarField f(spec);
  f.at(Coord{}) = 1.0;
  const ScalarField g = smooth(f, 5);
  CHECK(sum(g) == doctest::Approx(1.0));
  CHECK(g.at(Coord{}) < 1.0);
}

TEST_CASE("continuum kernel is singular at its pole") {
  CHECK_THROWS_AS(continuum_kernel(Point{}, Point{}, 2), SingularityError);
}
