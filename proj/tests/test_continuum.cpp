#include <cmath>
#include <numbers>

#include "agg/continuum.hpp"
#include "agg/errors.hpp"
#include "doctest.h"

using namespace agg;

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(unit_ball_volume(4) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0));
}

TEST_CASE("signed distances of balls and boxes") {
  const auto ball = ContinuumSet::ball(2, make_point({1.0, 0.0}), 2.0);
  CHECK(ball.signed_distance(make_point({1.0, 0.0})) == doctest::Approx(-2.0));
  CHECK(ball.signed_distance(make_point({4.0, 0.0})) == doctest::Approx(1.0));
  const auto box = ContinuumSet::box(2, make_point({0.0, 0.0}), make_point({2.0, 1.0}));
  CHECK(box.signed_distance(make_point({1.0, 0.5})) == doctest::Approx(-0.5));
  CHECK(box.signed_distance(make_point({3.0, 2.0})) == doctest::Approx(std::sqrt(2.0)));
  CHECK(box.volume() == doctest::Approx(2.0));
}

TEST_CASE("rasterized disk area converges") {
  const auto disk = ContinuumSet::ball(2, Point{}, 1.0);
  const auto spec = LatticeSpec::covering(2, 0.01, Point{}, 1.2);
  const double area = count(disk.rasterize(spec)) * 1e-4;
  CHECK(area == doctest::Approx(std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("neighborhoods of a ball are balls") {
  const auto ball = ContinuumSet::ball(2, Point{}, 1.0);
  const auto inner = ball.inner_neighborhood(0.25);
  const auto outer = ball.outer_neighborhood(0.25);
  CHECK(inner.contains(make_point({0.74, 0.0})));
  CHECK_FALSE(inner.contains(make_point({0.76, 0.0})));
  CHECK(outer.contains(make_point({1.24, 0.0})));
  CHECK_FALSE(outer.contains(make_point({1.26, 0.0})));
}

TEST_CASE("cell unions use half-open cells") {
  const auto spec = LatticeSpec::centered(2, 0.5, 3);
  DomainMask m(spec);
  m.at(make_coord({1, 1})) = 1;
  const auto cells = ContinuumSet::cells(m);
  CHECK(cells.contains(make_point({0.5, 0.5})));
  CHECK(cells.contains(make_point({0.3, 0.7})));
  CHECK_FALSE(cells.contains(make_point({0.9, 0.5})));
  CHECK(cells.volume() == doctest::Approx(0.25));
}

TEST_CASE("discretization conserves mass exactly and rounds point masses") {
  ContinuumDensity sigma(2);
  sigma.add(2.0, ContinuumSet::ball(2, make_point({0.1, 0.0}), 0.7));
  sigma.add(1.0, ContinuumSet::box(2, make_point({-0.3, -0.4}), make_point({0.6, 0.2})));
  sigma.add_point_mass(make_point({0.0, 0.5}), 0.123);
  const double delta = 0.05;
  const auto spec = LatticeSpec::covering(2, delta, Point{}, 1.5);
  const ScalarField exact = discretize_density(spec, sigma, DiscretizeMode::ExactAverage);
  CHECK(sum(exact) * delta * delta == doctest::Approx(sigma.total_mass()).epsilon(1e-9));
  const ScalarField rounded = discretize_density(spec, sigma, DiscretizeMode::RoundToInteger);
  for (std::size_t i = 0; i < rounded.size(); ++i) CHECK(rounded[i] == std::floor(rounded[i]));
  CHECK(rounded.at(make_coord({0, 10})) >= std::round(0.123 / (delta * delta)));
}

TEST_CASE("indicator sums and bounds") {
  const auto a = ContinuumSet::ball(2, make_point({-0.5, 0.0}), 1.0);
  const auto b = ContinuumSet::ball(2, make_point({0.5, 0.0}), 1.0);
  const auto sigma = ContinuumDensity::indicator_sum(2, {a, b});
  CHECK(sigma.value(Point{}) == 2.0);
  CHECK(sigma.value(make_point({1.2, 0.0})) == 1.0);
  CHECK(sigma.total_mass() == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(sigma.bound() == 2.0);
}
