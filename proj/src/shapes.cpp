#include "agg/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agg {

BallSpec ball_of_volume(double volume, const Point& center, int dim) {
  if (!(volume > 0.0)) throw ValidationError("ball_of_volume: volume must be positive");
  return {center, volume, std::pow(volume / unit_ball_volume(dim), 1.0 / dim), dim};
}

double quartic_value(const Point& p, double r) {
  const double x2 = p[0] * p[0];
  const double y2 = p[1] * p[1];
  const double q = x2 + y2;
  return q * q - 2.0 * r * r * q - 2.0 * (x2 - y2);
}

double quartic_residual(const Point& p, double r) {
  const double scale = std::max(1.0, std::hypot(p[0], p[1]));
  return quartic_value(p, r) / std::pow(scale, 4);
}

std::vector<Coord> boundary_sites(const DomainMask& mask) {
  const LatticeSpec& spec = mask.spec();
  std::vector<Coord> out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!mask[i]) continue;
    const Coord c = spec.coord(i);
    bool edge = false;
    for (int a = 0; a < spec.dim() && !edge; ++a) {
      for (int s : {1, -1}) {
        Coord y = c;
        y[a] += s;
        if (!spec.contains(y) || !mask[spec.index(y)]) {
          edge = true;
          break;
        }
      }
    }
    if (edge) out.push_back(c);
  }
  return out;
}

QuarticCheck quartic_boundary_check(const DomainMask& mask, double r) {
  const LatticeSpec& spec = mask.spec();
  if (spec.dim() != 2) throw WrongDimensionError("quartic_boundary_check: d must be 2");
  if (!(r > 1.0)) throw ValidationError("quartic_boundary_check: needs r > 1 so the two disks overlap");
  const double delta = spec.spacing();
  QuarticCheck result;
  for (const Coord& c : boundary_sites(mask)) {
    const Point x = spec.point(c);
    if (std::hypot(x[0], x[1]) < 5.0 * delta) {
      ++result.excluded;
      continue;
    }
    ++result.checked;
    bool change = false;
    for (int a = 0; a < 2 && !change; ++a) {
      for (int s : {1, -1}) {
        Coord y = c;
        y[a] += s;
        if (spec.contains(y) && mask[spec.index(y)]) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int t = -2; t <= 2; ++t) {
          Point p = x;
          p[a] += t * s * delta;
          const double v = quartic_value(p, r);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (lo <= 0.0 && hi >= 0.0) {
          change = true;
          break;
        }
      }
    }
    if (change) ++result.sign_changes;
  }
  result.fraction = result.checked > 0 ? static_cast<double>(result.sign_changes) / result.checked : 0.0;
  return result;
}

}  // namespace agg
