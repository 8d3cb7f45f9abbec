#include <map>
#include <set>

#include "agg/errors.hpp"
#include "agg/rotor.hpp"
#include "doctest.h"

using namespace agg;

namespace {

ScalarField point_mass(double m, int half_width) {
  ScalarField sigma(LatticeSpec::centered(2, 1.0, half_width));
  sigma.at(Coord{}) = m;
  return sigma;
}

/// Direct trace of rotor aggregation from the origin with rotors N, E, S, W and all starting north.
std::set<std::pair<int, int>> trace(int m, std::map<std::pair<int, int>, int>& rotor) {
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {1, 0, -1, 0};
  std::set<std::pair<int, int>> occupied;
  for (int k = 0; k < m; ++k) {
    std::pair<int, int> p{0, 0};
    while (occupied.count(p)) {
      int& r = rotor[p];
      r = (r + 1) % 4;
      p = {p.first + dx[r], p.second + dy[r]};
    }
    occupied.insert(p);
  }
  return occupied;
}

}  // namespace

TEST_CASE("direction orders") {
  const auto two = DirectionOrder::standard(2);
  REQUIRE(two.size() == 4);
  CHECK(two.directions[0] == make_coord({0, 1}));
  CHECK(two.directions[1] == make_coord({1, 0}));
  CHECK(two.directions[2] == make_coord({0, -1}));
  CHECK(two.directions[3] == make_coord({-1, 0}));
  const auto three = DirectionOrder::standard(3);
  CHECK(three.size() == 6);
  CHECK(three.directions[0] == make_coord({1, 0, 0}));
  CHECK(three.directions[4] == make_coord({0, -1, 0}));
  CHECK(two.describe() == "N,E,S,W");
  CHECK(three.describe() == "+e1,+e2,+e3,-e1,-e2,-e3");
}

TEST_CASE("one-step trace: rotor pointing west turns north") {
  const auto spec = LatticeSpec::centered(2, 1.0, 3);
  DomainMask occupied(spec);
  occupied.at(Coord{}) = 1;
  RotorAggState state(occupied, RotorField::uniform(spec, 3), false);
  const Coord end = rotor_walk_until_unoccupied(state, Coord{});
  CHECK(end == make_coord({0, 1}));
  CHECK(state.rotors[spec.index(Coord{})] == 0);
  CHECK(state.occupied.at(make_coord({0, 1})) == 1);
}

TEST_CASE("engine matches a direct trace") {
  const int m = 700;
  std::map<std::pair<int, int>, int> rotor;
  const auto expected = trace(m, rotor);
  const RotorAggState s = rotor_aggregate(point_mass(m, 25), RotorField::uniform(LatticeSpec::centered(2, 1.0, 25), 0));
  CHECK(count(s.occupied) == expected.size());
  for (const auto& [x, y] : expected) CHECK(s.occupied.at(make_coord({x, y})) == 1);
  for (const auto& [p, r] : rotor) CHECK(s.rotors[s.rotors.spec().index(make_coord({p.first, p.second}))] == r);
}

TEST_CASE("runs are deterministic") {
  const auto spec = LatticeSpec::centered(2, 1.0, 30);
  const RotorAggState a = rotor_aggregate(point_mass(1500, 30), RotorField::random(spec, 4), true);
  const RotorAggState b = rotor_aggregate(point_mass(1500, 30), RotorField::random(spec, 4), true);
  CHECK(a.occupied == b.occupied);
  CHECK(a.rotors == b.rotors);
  CHECK(a.emissions == b.emissions);
}

TEST_CASE("occupied count equals the number of particles") {
  ScalarField sigma(LatticeSpec::centered(2, 1.0, 30));
  sigma.at(make_coord({-5, 0})) = 300;
  sigma.at(make_coord({6, 2})) = 200;
  sigma.at(make_coord({0, 0})) = 1;
  const RotorAggState s = rotor_aggregate(sigma, RotorField::random(sigma.spec(), 8));
  CHECK(count(s.occupied) == 501);
}

TEST_CASE("odometer flow bound holds in d = 2 and d = 3") {
  const RotorAggState two = rotor_aggregate(point_mass(3000, 40), RotorField::uniform(LatticeSpec::centered(2, 1.0, 40)), true);
  CHECK(odometer_flow_check(two) <= 6.0);
  ScalarField sigma3(LatticeSpec::centered(3, 1.0, 12));
  sigma3.at(Coord{}) = 2000;
  const RotorAggState three = rotor_aggregate(sigma3, RotorField::random(sigma3.spec(), 2), true);
  CHECK(odometer_flow_check(three) <= 10.0);
  CHECK(count(three.occupied) == 2000);
}

TEST_CASE("flow check needs edge tracking") {
  const RotorAggState s = rotor_aggregate(point_mass(10, 5), RotorField::uniform(LatticeSpec::centered(2, 1.0, 5)));
  CHECK_THROWS_AS(odometer_flow_check(s), ValidationError);
}

TEST_CASE("rotor smash sum has cardinality |A| + |B|") {
  const auto spec = LatticeSpec::centered(2, 1.0, 40);
  DomainMask a(spec);
  DomainMask b(spec);
  for_each_site_in(spec, make_coord({-10, -10}), make_coord({5, 5}), [&](std::size_t i, const Coord&) { a[i] = 1; });
  for_each_site_in(spec, make_coord({-2, -2}), make_coord({12, 12}), [&](std::size_t i, const Coord&) { b[i] = 1; });
  const DomainMask s = rotor_smash_sum(a, b, RotorField::uniform(spec));
  CHECK(count(s) == count(a) + count(b));
  CHECK(count(mask_intersection(s, mask_union(a, b))) == count(mask_union(a, b)));
}

TEST_CASE("box too small") {
  CHECK_THROWS_AS(rotor_aggregate(point_mass(200, 4), RotorField::uniform(LatticeSpec::centered(2, 1.0, 4))),
                  BoxTooSmallError);
}

TEST_CASE("variants keep the positive x-axis special") {
  const DomainMask absorb = rotor_variant_absorbing_axis(2000);
  const auto& spec = absorb.spec();
  CHECK(count(absorb) < 2000);
  for (int x = 1; x <= spec.hi()[0]; ++x) CHECK(absorb.at(make_coord({x, 0})) == 0);
  const DomainMask directed = rotor_variant_directed_axis(2000);
  CHECK(count(directed) == 2000);
}
