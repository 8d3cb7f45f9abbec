#include <cmath>
#include <map>

#include "agg/errors.hpp"
#include "agg/idla.hpp"
#include "doctest.h"

using namespace agg;

namespace {

ScalarField point_mass(double m, int half_width) {
  ScalarField sigma(LatticeSpec::centered(2, 1.0, half_width));
  sigma.at(Coord{}) = m;
  return sigma;
}

/// E_o of the exit time from {|x| < r} on Z², from E = 1 + mean of neighbors by Gauss–Seidel.
double exact_exit_time(double r) {
  const int n = static_cast<int>(std::ceil(r)) + 1;
  std::map<std::pair<int, int>, double> e;
  for (int x = -n; x <= n; ++x) {
    for (int y = -n; y <= n; ++y) {
      if (std::hypot(x, y) < r) e[{x, y}] = 0.0;
    }
  }
  auto at = [&](int x, int y) {
    const auto it = e.find({x, y});
    return it == e.end() ? 0.0 : it->second;
  };
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double change = 0.0;
    for (auto& [p, v] : e) {
      const auto [x, y] = p;
      const double next = 1.0 + 0.25 * (at(x + 1, y) + at(x - 1, y) + at(x, y + 1) + at(x, y - 1));
      change = std::max(change, std::abs(next - v));
      v = next;
    }
    if (change < 1e-12) break;
  }
  return at(0, 0);
}

}  // namespace

TEST_CASE("cluster size and reproducibility") {
  const ScalarField sigma = point_mass(800, 30);
  const IdlaResult a = idla_aggregate(sigma, 42);
  const IdlaResult b = idla_aggregate(sigma, 42);
  const IdlaResult c = idla_aggregate(sigma, 43);
  CHECK(count(a.cluster) == 800);
  CHECK(a.particles == 800);
  CHECK(a.cluster == b.cluster);
  CHECK(a.steps == b.steps);
  CHECK_FALSE(a.cluster == c.cluster);
}

TEST_CASE("cluster is connected and contains the source") {
  const IdlaResult r = idla_aggregate(point_mass(500, 30), 3);
  const auto& spec = r.cluster.spec();
  CHECK(r.cluster.at(Coord{}) == 1);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!r.cluster[i] || spec.coord(i) == Coord{}) continue;
    bool neighbor = false;
    const Coord c = spec.coord(i);
    for (int a = 0; a < 2; ++a) {
      for (int s : {1, -1}) {
        Coord y = c;
        y[a] += s;
        neighbor = neighbor || r.cluster.at(y);
      }
    }
    CHECK(neighbor);
  }
}

TEST_CASE("Diaconis-Fulton sum adds cardinalities") {
  const auto spec = LatticeSpec::centered(2, 1.0, 40);
  DomainMask a(spec);
  DomainMask b(spec);
  for_each_site_in(spec, make_coord({-10, -10}), make_coord({5, 5}), [&](std::size_t i, const Coord&) { a[i] = 1; });
  for_each_site_in(spec, make_coord({-2, -2}), make_coord({12, 12}), [&](std::size_t i, const Coord&) { b[i] = 1; });
  for (std::uint64_t seed = 1; seed <= 3; ++seed) CHECK(count(df_smash_sum(a, b, seed)) == count(a) + count(b));
  std::vector<Coord> order = sites_of(mask_intersection(a, b));
  std::reverse(order.begin(), order.end());
  CHECK(count(df_smash_sum(a, b, order, 1)) == count(a) + count(b));
  CHECK_THROWS_AS(df_smash_sum(a, b, {make_coord({-10, -10})}, 1), ValidationError);
}

TEST_CASE("exit time from a ball") {
  CHECK(mc_ball_exit_time(1.0, 1.0, 100, 1).mean == doctest::Approx(1.0));
  CHECK(exact_exit_time(2.0) == doctest::Approx(4.5));
  const double expected = exact_exit_time(6.0);
  const ExitTimeEstimate e = mc_ball_exit_time(6.0, 1.0, 20000, 9);
  CHECK(e.trials == 20000);
  CHECK(std::abs(e.mean - expected) < 4.0 * e.standard_error);
  const ExitTimeEstimate scaled = mc_ball_exit_time(0.6, 0.1, 20000, 9);
  CHECK(scaled.mean == doctest::Approx(e.mean));
  CHECK_THROWS(mc_ball_exit_time(1.0, 0.1, 0, 1));
}

TEST_CASE("exit time is reproducible") {
  const ExitTimeEstimate a = mc_ball_exit_time(3.0, 0.1, 4000, 17);
  const ExitTimeEstimate b = mc_ball_exit_time(3.0, 0.1, 4000, 17);
  CHECK(a.mean == b.mean);
  CHECK(a.standard_error == b.standard_error);
}

TEST_CASE("exit time in three dimensions") {
  const ExitTimeEstimate e = mc_ball_exit_time(10.0, 1.0, 4000, 5, 3);
  CHECK(e.mean == doctest::Approx(105.0).epsilon(0.1));
}
