#include <cmath>
#include <sstream>

#include "agg/errors.hpp"
#include "agg/obstacle.hpp"
#include "agg/rng.hpp"
#include "agg/sandpile.hpp"
#include "doctest.h"

using namespace agg;

namespace {

ScalarField point_mass(double m, int half_width, double spacing = 1.0) {
  ScalarField sigma(LatticeSpec::centered(2, spacing, half_width));
  sigma.at(Coord{}) = m;
  return sigma;
}

ScalarField random_density(std::uint64_t seed, int half_width) {
  ScalarField sigma(LatticeSpec::centered(2, 1.0, half_width));
  RngStream rng(seed, 0);
  for_each_site_in(sigma.spec(), make_coord({-3, -4}), make_coord({4, 3}),
                   [&](std::size_t i, const Coord&) { sigma[i] = 3.0 * rng.uniform(); });
  return sigma;
}

}  // namespace

TEST_CASE("five particles at the origin") {
  const SandpileResult r = stabilize(point_mass(5.0, 4));
  CHECK(count(r.domain) == 5);
  CHECK(r.odometer.at(Coord{}) == doctest::Approx(4.0));
  CHECK(max_abs(r.odometer) == doctest::Approx(4.0));
  for (const Coord& c : {make_coord({1, 0}), make_coord({0, -1})}) CHECK(r.mass.at(c) == doctest::Approx(1.0));
}

TEST_CASE("odometer scales with spacing squared") {
  const SandpileResult r = stabilize(point_mass(5.0, 4, 0.1));
  CHECK(r.odometer.at(Coord{}) == doctest::Approx(4.0 * 0.01));
}

TEST_CASE("toppling keeps one unit and splits the excess") {
  SandpileState s(point_mass(3.0, 3));
  topple_site(s, Coord{});
  CHECK(s.mass.at(Coord{}) == 1.0);
  CHECK(s.mass.at(make_coord({0, 1})) == doctest::Approx(0.5));
  CHECK(s.odometer.at(Coord{}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(topple_site(s, Coord{}), IllegalTopplingError);
  CHECK_THROWS_AS(topple_site(s, make_coord({2, 2})), IllegalTopplingError);
}

TEST_CASE("mass is conserved and the domain is where mass is full") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ScalarField sigma = random_density(seed, 14);
    const SandpileResult r = stabilize(sigma);
    CHECK(sum(r.mass) == doctest::Approx(sum(sigma)).epsilon(1e-12));
    for (std::size_t i = 0; i < r.mass.size(); ++i) {
      CHECK(r.mass[i] <= 1.0 + 1e-10);
      if (r.odometer[i] > 0.0) CHECK(r.mass[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("odometer identity: Laplacian of u is nu - sigma") {
  const ScalarField sigma = random_density(7, 14);
  const SandpileResult r = stabilize(sigma);
  CHECK(odometer_identity_residual(sigma, r.mass, r.odometer) < 1e-9);
}

TEST_CASE("schedules agree (abelian property)") {
  for (std::uint64_t seed = 11; seed <= 14; ++seed) {
    const ScalarField sigma = random_density(seed, 14);
    std::vector<Coord> order;
    for_each_site_in(sigma.spec(), make_coord({-13, -13}), make_coord({13, 13}),
                     [&](std::size_t, const Coord& c) { order.push_back(c); });
    std::reverse(order.begin(), order.end());
    const AbelianReport rep =
        verify_abelian(sigma,
                       {TopplingSchedule::raster(), TopplingSchedule::red_black(),
                        TopplingSchedule::priority_max_excess(), TopplingSchedule::explicit_list(order)},
                       1e-12);
    CHECK(rep.passed);
    CHECK(rep.max_odometer_gap < 1e-9);
    CHECK(rep.domains_equal);
  }
}

TEST_CASE("explicit list that misses an unstable site is rejected") {
  const ScalarField sigma = point_mass(10.0, 6);
  CHECK_THROWS_AS(stabilize(sigma, {TopplingSchedule::explicit_list({make_coord({1, 1})}), 1e-10, nullptr}),
                  ValidationError);
}

TEST_CASE("box too small") {
  CHECK_THROWS_AS(stabilize(point_mass(200.0, 4)), BoxTooSmallError);
}

TEST_CASE("aggregation box holds the aggregate") {
  ContinuumDensity sigma(2);
  sigma.add_point_mass(Point{}, 3000.0);
  const LatticeSpec spec = aggregation_box(sigma, 1.0);
  const ScalarField s = discretize_density(spec, sigma, DiscretizeMode::ExactAverage);
  CHECK_NOTHROW(stabilize(s));
  const double r = std::sqrt(3000.0 / std::numbers::pi);
  CHECK(spec.extent()[0] >= static_cast<int>(2.0 * 1.5 * r));
}

TEST_CASE("progress lines") {
  std::ostringstream os;
  stabilize(point_mass(30.0, 8), {TopplingSchedule::red_black(), 1e-10, &os});
  const std::string out = os.str();
  CHECK_FALSE(out.empty());
  CHECK(std::count(out.begin(), out.end(), ',') >= 2);
}

TEST_CASE("least action principle") {
  const ScalarField sigma = random_density(21, 14);
  const SandpileResult r = stabilize(sigma, {TopplingSchedule::red_black(), 1e-12, nullptr});
  CHECK(least_action_check(sigma, r.odometer).accepted);

  ScalarField bigger = r.odometer;
  for (std::size_t i = 0; i < bigger.size(); ++i) {
    if (!sigma.spec().on_frame(i) && r.odometer[i] > 0.0) bigger[i] += 0.1 * r.odometer[i];
  }
  const auto over = least_action_check(sigma, bigger);
  CHECK_FALSE(over.accepted);

  ScalarField smaller = r.odometer;
  for (std::size_t i = 0; i < smaller.size(); ++i) smaller[i] *= 0.5;
  const auto under = least_action_check(sigma, smaller);
  CHECK_FALSE(under.accepted);
  CHECK(under.witness.has_value());

  ScalarField negative = r.odometer;
  negative.at(make_coord({10, 10})) = -1.0;
  CHECK_FALSE(least_action_check(sigma, negative).accepted);
}

TEST_CASE("sandpile odometer equals the discrete obstacle solution") {
  const ScalarField sigma = point_mass(300.0, 20);
  const SandpileResult pile = stabilize(sigma);
  const ObstacleProblem problem = build_obstacle_discrete(sigma);
  MajorantOptions options;
  options.tol = 1e-11;
  const ScalarField u = odometer_from_majorant(problem, least_majorant(problem, options));
  double gap = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) gap = std::max(gap, std::abs(u[i] - pile.odometer[i]));
  CHECK(gap < 1e-6);
}
