#include "agg/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace agg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double box_signed_distance(const Point& lo, const Point& hi, const Point& x, int dim) {
  double outside = 0.0;
  double inside = -kInf;
  for (int i = 0; i < dim; ++i) {
    const double q = std::max(lo[i] - x[i], x[i] - hi[i]);
    if (q > 0) outside += q * q;
    inside = std::max(inside, q);
  }
  return outside > 0 ? std::sqrt(outside) : std::min(inside, 0.0);
}

// Distance from x to the closed cell around site c.
double cell_distance(const LatticeSpec& spec, const Coord& c, const Point& x) {
  const double h = 0.5 * spec.spacing();
  double s = 0.0;
  for (int i = 0; i < spec.dim(); ++i) {
    const double q = std::abs(x[i] - spec.spacing() * c[i]) - h;
    if (q > 0) s += q * q;
  }
  return std::sqrt(s);
}

double cells_signed_distance(const DomainMask& mask, const Point& x) {
  const LatticeSpec& spec = mask.spec();
  const int d = spec.dim();
  const double h = 0.5 * spec.spacing();
  Coord c{};
  for (int i = 0; i < d; ++i) c[i] = static_cast<int>(std::floor(x[i] / spec.spacing() + 0.5));
  const bool inside = spec.contains(c) && mask[spec.index(c)];
  if (!inside) {
    double best = kInf;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) best = std::min(best, cell_distance(spec, spec.coord(i), x));
    }
    return best;
  }
  // depth: nearest unset cell, or the region beyond the box
  double best = kInf;
  const Coord hi = spec.hi();
  for (int i = 0; i < d; ++i) {
    best = std::min(best, x[i] - (spec.spacing() * spec.lo()[i] - h));
    best = std::min(best, (spec.spacing() * hi[i] + h) - x[i]);
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) best = std::min(best, cell_distance(spec, spec.coord(i), x));
  }
  return -best;
}

}  // namespace

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

ContinuumSet ContinuumSet::ball(int dim, const Point& center, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw ValidationError("ball radius must be finite and >= 0");
  return ContinuumSet(dim, BallRegion{center, radius});
}

ContinuumSet ContinuumSet::box(int dim, const Point& lo, const Point& hi) {
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
      throw ValidationError("box corners must be finite with lo <= hi");
    }
  }
  return ContinuumSet(dim, BoxRegion{lo, hi});
}

ContinuumSet ContinuumSet::cells(const DomainMask& mask) { return ContinuumSet(mask.spec().dim(), CellRegion{mask}); }

ContinuumSet ContinuumSet::unite(int dim, std::vector<ContinuumSet> members) {
  for (const auto& m : members) {
    if (m.dim() != dim) throw ValidationError("union members must share a dimension");
  }
  return ContinuumSet(dim, UnionRegion{std::move(members)});
}

bool ContinuumSet::is_empty() const {
  return std::visit(overloaded{
                        [](const BallRegion&) { return false; },
                        [](const BoxRegion&) { return false; },
                        [](const CellRegion& c) { return count(c.mask) == 0; },
                        [](const UnionRegion& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const ContinuumSet& m) { return m.is_empty(); });
                        },
                        [](const OffsetRegion& o) { return o.base->is_empty(); },
                    },
                    *node_);
}

bool ContinuumSet::contains(const Point& x) const {
  const int d = dim_;
  return std::visit(overloaded{
                        [&](const BallRegion& b) {
                          double s = 0.0;
                          for (int i = 0; i < d; ++i) s += (x[i] - b.center[i]) * (x[i] - b.center[i]);
                          return s <= b.radius * b.radius;
                        },
                        [&](const BoxRegion& b) {
                          for (int i = 0; i < d; ++i) {
                            if (x[i] < b.lo[i] || x[i] > b.hi[i]) return false;
                          }
                          return true;
                        },
                        [&](const CellRegion& c) {
                          Coord site{};
                          for (int i = 0; i < d; ++i) {
                            site[i] = static_cast<int>(std::floor(x[i] / c.mask.spec().spacing() + 0.5));
                          }
                          return c.mask.spec().contains(site) && c.mask[c.mask.spec().index(site)] != 0;
                        },
                        [&](const UnionRegion& u) {
                          return std::any_of(u.members.begin(), u.members.end(),
                                             [&](const ContinuumSet& m) { return m.contains(x); });
                        },
                        [&](const OffsetRegion& o) { return o.base->signed_distance(x) <= o.amount; },
                    },
                    *node_);
}

double ContinuumSet::signed_distance(const Point& x) const {
  const int d = dim_;
  return std::visit(overloaded{
                        [&](const BallRegion& b) {
                          double s = 0.0;
                          for (int i = 0; i < d; ++i) s += (x[i] - b.center[i]) * (x[i] - b.center[i]);
                          return std::sqrt(s) - b.radius;
                        },
                        [&](const BoxRegion& b) { return box_signed_distance(b.lo, b.hi, x, d); },
                        [&](const CellRegion& c) { return cells_signed_distance(c.mask, x); },
                        [&](const UnionRegion& u) {
                          double best = kInf;
                          for (const auto& m : u.members) best = std::min(best, m.signed_distance(x));
                          return best;
                        },
                        [&](const OffsetRegion& o) { return o.base->signed_distance(x) - o.amount; },
                    },
                    *node_);
}

double ContinuumSet::volume() const {
  const int d = dim_;
  return std::visit(overloaded{
                        [&](const BallRegion& b) { return unit_ball_volume(d) * std::pow(b.radius, d); },
                        [&](const BoxRegion& b) {
                          double v = 1.0;
                          for (int i = 0; i < d; ++i) v *= b.hi[i] - b.lo[i];
                          return v;
                        },
                        [&](const CellRegion& c) {
                          return static_cast<double>(count(c.mask)) * std::pow(c.mask.spec().spacing(), d);
                        },
                        [&](const UnionRegion& u) -> double {
                          if (u.members.empty()) return 0.0;
                          throw ValidationError("volume of a union is not available in closed form");
                        },
                        [&](const OffsetRegion&) -> double {
                          throw ValidationError("volume of an offset set is not available in closed form");
                        },
                    },
                    *node_);
}

ContinuumSet ContinuumSet::offset(double amount) const {
  if (const auto* b = std::get_if<BallRegion>(node_.get())) {
    if (b->radius + amount < 0.0) return empty(dim_);
    return ball(dim_, b->center, b->radius + amount);
  }
  if (const auto* b = std::get_if<BoxRegion>(node_.get()); b && amount < 0.0) {
    Point lo = b->lo;
    Point hi = b->hi;
    for (int i = 0; i < dim_; ++i) {
      lo[i] -= amount;
      hi[i] += amount;
      if (lo[i] > hi[i]) return empty(dim_);
    }
    return box(dim_, lo, hi);
  }
  if (is_empty()) return empty(dim_);
  return ContinuumSet(dim_, OffsetRegion{std::make_shared<const ContinuumSet>(*this), amount});
}

ContinuumSet ContinuumSet::inner_neighborhood(double epsilon) const {
  if (!(epsilon > 0.0)) throw ValidationError("inner_neighborhood: epsilon must be positive");
  return offset(-epsilon);
}

ContinuumSet ContinuumSet::outer_neighborhood(double epsilon) const {
  if (!(epsilon > 0.0)) throw ValidationError("outer_neighborhood: epsilon must be positive");
  return offset(epsilon);
}

DomainMask ContinuumSet::rasterize(const LatticeSpec& spec) const {
  if (spec.dim() != dim_) throw ValidationError("rasterize: dimension mismatch");
  DomainMask out(spec);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = contains(spec.point(i)) ? 1 : 0;
  return out;
}

ShapeCheck check_shape_convergence(const DomainMask& a, const ContinuumSet& d, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("check_shape_convergence: epsilon must be positive");
  if (a.spec().dim() != d.dim()) throw ValidationError("check_shape_convergence: dimension mismatch");
  ShapeCheck check;
  const LatticeSpec& spec = a.spec();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double sd = d.signed_distance(spec.point(i));
    if (sd <= -epsilon && !a[i]) check.missing_inner.push_back(spec.coord(i));
    if (a[i] && sd > epsilon) check.outside_outer.push_back(spec.coord(i));
  }
  if (!check.missing_inner.empty()) {
    check.verdict = ShapeVerdict::FailInner;
  } else if (!check.outside_outer.empty()) {
    check.verdict = ShapeVerdict::FailOuter;
  }
  return check;
}

ContinuumDensity::ContinuumDensity(int dim) : dim_(dim) {
  if (dim < 2 || dim > kMaxDim) throw ValidationError("density dimension out of range");
}

ContinuumDensity ContinuumDensity::indicator_sum(int dim, const std::vector<ContinuumSet>& sets) {
  ContinuumDensity sigma(dim);
  for (const auto& s : sets) sigma.add(1.0, s);
  return sigma;
}

ContinuumDensity& ContinuumDensity::add(double weight, ContinuumSet region) {
  if (!std::isfinite(weight)) throw ValidationError("density weights must be finite");
  if (region.dim() != dim_) throw ValidationError("density term dimension mismatch");
  const auto& node = region.node();
  if (std::holds_alternative<UnionRegion>(node) || std::holds_alternative<OffsetRegion>(node)) {
    if (!region.is_empty()) throw ValidationError("density regions must be balls, boxes or cell unions");
    return *this;
  }
  if (const auto* c = std::get_if<CellRegion>(&node); c && c->mask.spec().dim() != dim_) {
    throw ValidationError("cell region dimension mismatch");
  }
  terms_.push_back({weight, std::move(region)});
  return *this;
}

ContinuumDensity& ContinuumDensity::add_point_mass(const Point& center, double mass) {
  if (!std::isfinite(mass) || mass < 0.0) throw ValidationError("point masses must be finite and >= 0");
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(center[i])) throw ValidationError("point mass center must be finite");
  }
  points_.push_back({center, mass});
  return *this;
}

double ContinuumDensity::value(const Point& x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    if (t.region.contains(x)) v += t.weight;
  }
  return v;
}

double ContinuumDensity::bound() const {
  double m = 0.0;
  for (const auto& t : terms_) m += std::max(t.weight, 0.0);
  return m;
}

double ContinuumDensity::total_mass() const {
  double m = 0.0;
  for (const auto& t : terms_) m += t.weight * t.region.volume();
  for (const auto& p : points_) m += p.mass;
  return m;
}

std::pair<Point, Point> ContinuumDensity::support_bounds() const {
  Point lo{};
  Point hi{};
  for (int i = 0; i < dim_; ++i) {
    lo[i] = kInf;
    hi[i] = -kInf;
  }
  auto include = [&](const Point& a, const Point& b) {
    for (int i = 0; i < dim_; ++i) {
      lo[i] = std::min(lo[i], a[i]);
      hi[i] = std::max(hi[i], b[i]);
    }
  };
  for (const auto& t : terms_) {
    std::visit(overloaded{
                   [&](const BallRegion& b) {
                     Point a = b.center;
                     Point c = b.center;
                     for (int i = 0; i < dim_; ++i) {
                       a[i] -= b.radius;
                       c[i] += b.radius;
                     }
                     include(a, c);
                   },
                   [&](const BoxRegion& b) { include(b.lo, b.hi); },
                   [&](const CellRegion& c) {
                     const double h = 0.5 * c.mask.spec().spacing();
                     for (std::size_t i = 0; i < c.mask.size(); ++i) {
                       if (!c.mask[i]) continue;
                       Point a = c.mask.spec().point(i);
                       Point b = a;
                       for (int k = 0; k < dim_; ++k) {
                         a[k] -= h;
                         b[k] += h;
                       }
                       include(a, b);
                     }
                   },
                   [](const UnionRegion&) {},
                   [](const OffsetRegion&) {},
               },
               t.region.node());
  }
  for (const auto& p : points_) include(p.center, p.center);
  return {lo, hi};
}

namespace {

// ∫ over [a, b] ∩ [c, d]
double overlap(double a, double b, double c, double d) { return std::max(0.0, std::min(b, d) - std::max(a, c)); }

void accumulate_box(const LatticeSpec& spec, double weight, const Point& lo, const Point& hi, ScalarField& mass) {
  const int d = spec.dim();
  const double h = 0.5 * spec.spacing();
  const auto [clo, chi] = site_range(spec, lo, hi);
  for_each_site_in(spec, clo, chi, [&](std::size_t i, const Coord& c) {
    const Point x = spec.point(c);
    double v = 1.0;
    for (int k = 0; k < d && v > 0.0; ++k) v *= overlap(x[k] - h, x[k] + h, lo[k], hi[k]);
    if (v > 0.0) mass[i] += weight * v;
  });
}

void accumulate_ball(const LatticeSpec& spec, double weight, const BallRegion& ball, ScalarField& mass) {
  constexpr int kRefine = 4;
  const int d = spec.dim();
  const double delta = spec.spacing();
  const double h = 0.5 * delta;
  const double cell = std::pow(delta, d);
  const double r2 = ball.radius * ball.radius;
  int samples = 1;
  for (int k = 0; k < d; ++k) samples *= kRefine;
  Point blo = ball.center;
  Point bhi = ball.center;
  for (int k = 0; k < d; ++k) {
    blo[k] -= ball.radius;
    bhi[k] += ball.radius;
  }
  const auto [clo, chi] = site_range(spec, blo, bhi);
  double full = 0.0;
  double partial_sum = 0.0;
  std::vector<std::pair<std::size_t, double>> partial;
  for_each_site_in(spec, clo, chi, [&](std::size_t i, const Coord& c) {
    const Point x = spec.point(c);
    double near = 0.0;
    double far = 0.0;
    for (int k = 0; k < d; ++k) {
      const double q = std::abs(x[k] - ball.center[k]);
      near += std::pow(std::max(0.0, q - h), 2);
      far += (q + h) * (q + h);
    }
    if (near >= r2) return;
    if (far <= r2) {
      full += cell;
      mass[i] += weight * cell;
      return;
    }
    int inside = 0;
    for (int s = 0; s < samples; ++s) {
      int rem = s;
      double dist2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const int j = rem % kRefine;
        rem /= kRefine;
        const double y = x[k] - h + (j + 0.5) * delta / kRefine;
        dist2 += (y - ball.center[k]) * (y - ball.center[k]);
      }
      inside += dist2 <= r2 ? 1 : 0;
    }
    // half a sample of prior keeps every straddling cell positive
    partial.emplace_back(i, (inside + 0.5) / (samples + 1.0));
    partial_sum += partial.back().second;
  });
  if (partial.empty()) return;
  const double rest = std::max(0.0, unit_ball_volume(d) * std::pow(ball.radius, d) - full);
  for (const auto& [i, f] : partial) mass[i] += weight * rest * f / partial_sum;
}

}  // namespace

ScalarField discretize_density(const LatticeSpec& spec, const ContinuumDensity& sigma, DiscretizeMode mode) {
  if (sigma.dim() != spec.dim()) throw ValidationError("discretize_density: dimension mismatch");
  const int d = spec.dim();
  const double h = 0.5 * spec.spacing();
  if (!sigma.empty()) {
    const auto [lo, hi] = sigma.support_bounds();
    const Point box_lo = spec.origin_offset();
    const Point box_hi = spec.point(spec.hi());
    for (int k = 0; k < d; ++k) {
      if (lo[k] < box_lo[k] - h || hi[k] > box_hi[k] + h) {
        throw ValidationError("discretize_density: support of sigma leaves " + spec.describe());
      }
    }
  }
  ScalarField mass(spec);
  for (const auto& t : sigma.terms()) {
    std::visit(overloaded{
                   [&](const BallRegion& b) { accumulate_ball(spec, t.weight, b, mass); },
                   [&](const BoxRegion& b) { accumulate_box(spec, t.weight, b.lo, b.hi, mass); },
                   [&](const CellRegion& c) {
                     const LatticeSpec& cs = c.mask.spec();
                     const double ch = 0.5 * cs.spacing();
                     const bool aligned = cs.spacing() == spec.spacing();
                     for (std::size_t i = 0; i < c.mask.size(); ++i) {
                       if (!c.mask[i]) continue;
                       if (aligned) {
                         mass[spec.checked_index(cs.coord(i))] += t.weight * std::pow(spec.spacing(), d);
                         continue;
                       }
                       Point lo = cs.point(i);
                       Point hi = lo;
                       for (int k = 0; k < d; ++k) {
                         lo[k] -= ch;
                         hi[k] += ch;
                       }
                       accumulate_box(spec, t.weight, lo, hi, mass);
                     }
                   },
                   [](const UnionRegion&) {},
                   [](const OffsetRegion&) {},
               },
               t.region.node());
  }
  for (const auto& p : sigma.point_masses()) mass[spec.index(site_of_point(spec, p.center))] += p.mass;

  const double inv_cell = 1.0 / std::pow(spec.spacing(), d);
  for (std::size_t i = 0; i < mass.size(); ++i) {
    double v = mass[i] * inv_cell;
    if (mode == DiscretizeMode::RoundToInteger) {
      // absorb float noise from the cell integrals before rounding half up
      v = std::floor(v + 0.5 + 1e-9);
    }
    mass[i] = v;
  }
  return mass;
}

}  // namespace agg
