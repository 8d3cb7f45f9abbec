#pragma once

// Reference limit shapes: balls of prescribed volume and the quartic boundary
// of the smash sum of two equal disks centered at (±1, 0).

#include <vector>

#include "agg/continuum.hpp"
#include "agg/lattice.hpp"

namespace agg {

struct BallSpec {
  Point center{};
  double volume = 0.0;
  double radius = 0.0;
  int dim = 2;

  ContinuumSet set() const { return ContinuumSet::ball(dim, center, radius); }
};

/// r = (λ/ω_d)^{1/d}.
BallSpec ball_of_volume(double volume, const Point& center, int dim);

/// P(x, y) = (x²+y²)² - 2r²(x²+y²) - 2(x²-y²).
double quartic_value(const Point& p, double r);
/// P / max(1, |p|)⁴.
double quartic_residual(const Point& p, double r);

/// Set sites with at least one of their 2d neighbors unset (or outside the box).
std::vector<Coord> boundary_sites(const DomainMask& mask);

struct QuarticCheck {
  std::size_t checked = 0;
  std::size_t sign_changes = 0;
  std::size_t excluded = 0;
  double fraction = 0.0;
};

/// For each boundary site outside the 5δ disk around the origin, looks for a
/// sign change of P between the site and a point at most 2δ away along the
/// outward directions. Requires r > 1 (overlapping disks).
QuarticCheck quartic_boundary_check(const DomainMask& mask, double r);

}  // namespace agg
