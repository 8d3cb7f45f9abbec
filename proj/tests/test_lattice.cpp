#include <cmath>
#include <limits>

#include "agg/errors.hpp"
#include "agg/lattice.hpp"
#include "agg/rng.hpp"
#include "doctest.h"

using namespace agg;

namespace {

DomainMask random_mask(const LatticeSpec& spec, std::uint64_t seed, double density) {
  RngStream rng(seed, 0);
  DomainMask m(spec);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < density;
  return m;
}

double brute_hausdorff(const DomainMask& a, const DomainMask& b) {
  const auto& spec = a.spec();
  auto one_way = [&](const DomainMask& p, const DomainMask& q) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i]) continue;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (!q[j]) continue;
        const Point x = spec.point(i);
        const Point y = spec.point(j);
        best = std::min(best, std::hypot(x[0] - y[0], x[1] - y[1]));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

}  // namespace

TEST_CASE("index and coord are inverse") {
  const LatticeSpec spec(3, 0.5, make_coord({-2, 1, 0}), make_coord({4, 3, 5}));
  CHECK(spec.size() == 60);
  for (std::size_t i = 0; i < spec.size(); ++i) CHECK(spec.index(spec.coord(i)) == i);
  CHECK(spec.point(make_coord({-2, 1, 0}))[0] == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spec.checked_index(make_coord({2, 1, 0})), DomainError);
}

TEST_CASE("row-major layout: last axis is contiguous") {
  const LatticeSpec spec(2, 1.0, make_coord({0, 0}), make_coord({4, 5}));
  CHECK(spec.index(make_coord({0, 1})) == 1);
  CHECK(spec.index(make_coord({1, 0})) == 5);
}

TEST_CASE("frame sites") {
  const auto spec = LatticeSpec::centered(2, 1.0, 3);
  std::size_t frame = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) frame += spec.on_frame(i);
  CHECK(frame == 7 * 7 - 5 * 5);
}

TEST_CASE("discrete Laplacian of |x|^2 is 1 away from the box edge") {
  for (int d : {2, 3}) {
    const double delta = 0.25;
    const auto spec = LatticeSpec::centered(d, delta, 4);
    ScalarField f(spec);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = squared_norm(spec.point(i), d);
    const ScalarField lap = discrete_laplacian(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!spec.on_frame(i)) CHECK(lap[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("symmetric difference counts cells") {
  const auto spec = LatticeSpec::centered(2, 0.1, 5);
  DomainMask a(spec);
  DomainMask b(spec);
  a[3] = a[4] = 1;
  b[4] = b[5] = b[6] = 1;
  CHECK(symmetric_difference_volume(a, b) == doctest::Approx(3 * 0.01));
  CHECK(symmetric_difference_volume(a, a) == 0.0);
}

TEST_CASE("Hausdorff distance matches brute force on random masks") {
  const auto spec = LatticeSpec::centered(2, 0.5, 6);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const DomainMask a = random_mask(spec, seed, 0.2);
    const DomainMask b = random_mask(spec, seed + 100, 0.3);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(brute_hausdorff(a, b)));
  }
}

TEST_CASE("inner-outer Hausdorff includes complements") {
  const auto spec = LatticeSpec::centered(2, 1.0, 6);
  DomainMask a(spec);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = norm(spec.point(i), 2) <= 4.0;
  DomainMask b = a;
  b.at(make_coord({0, 0})) = 0;
  CHECK(hausdorff_distance(a, b) == doctest::Approx(1.0));
  DomainMask ac(spec);
  DomainMask bc(spec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ac[i] = !a[i];
    bc[i] = !b[i];
  }
  CHECK(inner_outer_hausdorff(a, b) == doctest::Approx(std::max(brute_hausdorff(a, b), brute_hausdorff(ac, bc))));
}

TEST_CASE("neighborhoods follow the closed-ball definitions") {
  const auto spec = LatticeSpec::centered(2, 1.0, 8);
  const DomainMask m = random_mask(spec, 9, 0.6);
  const double eps = 1.5;
  const DomainMask inner = inner_neighborhood(m, eps);
  const DomainMask outer = outer_neighborhood(m, eps);
  for (std::size_t i = 0; i < m.size(); ++i) {
    bool all = true;
    bool any = false;
    const Coord c = spec.coord(i);
    for (int dx = -2; dx <= 2; ++dx) {
      for (int dy = -2; dy <= 2; ++dy) {
        if (dx * dx + dy * dy > eps * eps) continue;
        const Coord y = make_coord({c[0] + dx, c[1] + dy});
        const bool set = spec.contains(y) && m[spec.index(y)];
        all = all && set;
        any = any || set;
      }
    }
    CHECK(bool(inner[i]) == all);
    CHECK(bool(outer[i]) == any);
  }
}

TEST_CASE("shape check: a mask passes against itself and fails against a shifted copy") {
  const auto spec = LatticeSpec::centered(2, 1.0, 20);
  DomainMask disk(spec);
  DomainMask shifted(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Point x = spec.point(i);
    disk[i] = std::hypot(x[0], x[1]) <= 10.0;
    shifted[i] = std::hypot(x[0] - 4.0, x[1]) <= 10.0;
  }
  CHECK(check_shape_convergence(disk, disk, 1.0).passed());
  const ShapeCheck bad = check_shape_convergence(shifted, disk, 1.0);
  CHECK_FALSE(bad.passed());
  CHECK_FALSE(bad.outside_outer.empty());
  CHECK(check_shape_convergence(shifted, disk, 4.5).passed());
}

TEST_CASE("remap keeps sites and rejects losing them") {
  const auto small = LatticeSpec::centered(2, 1.0, 3);
  const auto big = LatticeSpec::centered(2, 1.0, 6);
  DomainMask m(small);
  m.at(make_coord({2, -1})) = 1;
  const DomainMask r = remap(m, big);
  CHECK(count(r) == 1);
  CHECK(r.at(make_coord({2, -1})) == 1);
  DomainMask edge(big);
  edge.at(make_coord({5, 5})) = 1;
  CHECK_THROWS(remap(edge, small));
}

TEST_CASE("site_of_point rounds to the nearest site") {
  const auto spec = LatticeSpec::centered(2, 0.1, 10);
  const Coord c = site_of_point(spec, make_point({0.23, -0.17}));
  CHECK(c[0] == 2);
  CHECK(c[1] == -2);
}
