#include <cmath>
#include <numbers>

#include "agg/errors.hpp"
#include "agg/shapes.hpp"
#include "doctest.h"

using namespace agg;

TEST_CASE("ball of volume") {
  const BallSpec b = ball_of_volume(1e4, Point{}, 2);
  CHECK(b.radius == doctest::Approx(56.4189583548));
  const BallSpec c = ball_of_volume(4.0 * std::numbers::pi / 3.0, Point{}, 3);
  CHECK(c.radius == doctest::Approx(1.0));
  CHECK_THROWS_AS(ball_of_volume(0.0, Point{}, 2), ValidationError);
}

TEST_CASE("quartic vanishes on its axis crossings") {
  const double r = 1.5;
  CHECK(quartic_value(make_point({std::sqrt(2 * r * r + 2), 0.0}), r) == doctest::Approx(0.0).scale(1.0));
  CHECK(quartic_value(make_point({0.0, std::sqrt(2 * r * r - 2)}), r) == doctest::Approx(0.0).scale(1.0));
  CHECK(quartic_value(Point{}, r) == 0.0);
  CHECK(quartic_value(make_point({1.0, 0.0}), r) < 0.0);
  CHECK(quartic_residual(make_point({3.0, 3.0}), r) > 0.0);
}

TEST_CASE("boundary sites of a square") {
  const auto spec = LatticeSpec::centered(2, 1.0, 6);
  DomainMask m(spec);
  for_each_site_in(spec, make_coord({-2, -2}), make_coord({2, 2}), [&](std::size_t i, const Coord&) { m[i] = 1; });
  CHECK(boundary_sites(m).size() == 16);
}

TEST_CASE("quartic check accepts the quartic region and rejects a disk") {
  const double r = 1.5;
  const auto spec = LatticeSpec::covering_box(2, 0.02, make_point({-3.0, -2.2}), make_point({3.0, 2.2}));
  DomainMask quartic(spec);
  DomainMask disk(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Point x = spec.point(i);
    quartic[i] = quartic_value(x, r) <= 0.0;
    disk[i] = std::hypot(x[0], x[1]) <= 2.0;
  }
  const QuarticCheck good = quartic_boundary_check(quartic, r);
  CHECK(good.fraction >= 0.99);
  const QuarticCheck bad = quartic_boundary_check(disk, r);
  CHECK(bad.fraction < 0.5);
  CHECK_THROWS_AS(quartic_boundary_check(quartic, 0.9), ValidationError);
}
