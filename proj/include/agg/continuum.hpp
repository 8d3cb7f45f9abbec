#pragma once

// Sets and densities on R^d: balls, boxes and unions of lattice cells, plus
// finite sums of weighted indicators and point masses.

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "agg/lattice.hpp"

namespace agg {

/// Volume ω_d of the unit ball in R^d.
double unit_ball_volume(int dim);

struct BallRegion {
  Point center{};
  double radius = 0.0;
};

struct BoxRegion {
  Point lo{};
  Point hi{};
};

/// Union of the cells x + [-δ/2, δ/2)^d of the set sites of a mask.
struct CellRegion {
  DomainMask mask;
};

class ContinuumSet;

struct UnionRegion {
  std::vector<ContinuumSet> members;
};

/// {x : signed_distance_base(x) <= amount}; positive amount dilates.
struct OffsetRegion {
  std::shared_ptr<const ContinuumSet> base;
  double amount = 0.0;
};

/// Immutable set in R^d with membership and a signed distance (negative inside).
///
/// Signed distances are exact for balls, boxes and cell unions. For unions the
/// outside distance is exact and the inside depth is the largest member depth,
/// a lower bound on the true depth near seams between overlapping members.
class ContinuumSet {
 public:
  using Node = std::variant<BallRegion, BoxRegion, CellRegion, UnionRegion, OffsetRegion>;

  static ContinuumSet ball(int dim, const Point& center, double radius);
  static ContinuumSet box(int dim, const Point& lo, const Point& hi);
  static ContinuumSet cells(const DomainMask& mask);
  static ContinuumSet unite(int dim, std::vector<ContinuumSet> members);
  static ContinuumSet empty(int dim) { return unite(dim, {}); }

  int dim() const noexcept { return dim_; }
  const Node& node() const noexcept { return *node_; }
  bool is_empty() const;

  bool contains(const Point& x) const;
  double signed_distance(const Point& x) const;
  /// Lebesgue measure; exact for balls, boxes and cells, unsupported for unions and offsets.
  double volume() const;

  /// D_ε = {x : B(x, ε) ⊂ D}.
  ContinuumSet inner_neighborhood(double epsilon) const;
  /// D^ε = {x : B(x, ε) meets D}.
  ContinuumSet outer_neighborhood(double epsilon) const;

  /// Lattice sites of the box lying in the set.
  DomainMask rasterize(const LatticeSpec& spec) const;

 private:
  ContinuumSet(int dim, Node node) : dim_(dim), node_(std::make_shared<const Node>(std::move(node))) {}
  ContinuumSet offset(double amount) const;

  int dim_;
  std::shared_ptr<const Node> node_;
};

/// D_ε ∩ lattice ⊂ A ⊂ D^ε for a continuum D, using its signed distance.
ShapeCheck check_shape_convergence(const DomainMask& a, const ContinuumSet& d, double epsilon);

struct DensityTerm {
  double weight = 1.0;
  ContinuumSet region;
};

struct PointMass {
  Point center{};
  double mass = 0.0;
};

/// σ = Σ w_i 1_{R_i} + Σ λ_j δ_{x_j} with balls, boxes or cell unions as regions.
class ContinuumDensity {
 public:
  explicit ContinuumDensity(int dim);

  /// Σ 1_{A_i}.
  static ContinuumDensity indicator_sum(int dim, const std::vector<ContinuumSet>& sets);

  ContinuumDensity& add(double weight, ContinuumSet region);
  ContinuumDensity& add_point_mass(const Point& center, double mass);

  int dim() const noexcept { return dim_; }
  const std::vector<DensityTerm>& terms() const noexcept { return terms_; }
  const std::vector<PointMass>& point_masses() const noexcept { return points_; }

  /// Bounded part of σ at x (point masses excluded).
  double value(const Point& x) const;
  /// Upper bound M on the bounded part: Σ max(w_i, 0).
  double bound() const;
  double total_mass() const;
  /// Bounding box of all supports, point masses included.
  std::pair<Point, Point> support_bounds() const;
  bool empty() const noexcept { return terms_.empty() && points_.empty(); }

 private:
  int dim_;
  std::vector<DensityTerm> terms_;
  std::vector<PointMass> points_;
};

enum class DiscretizeMode { RoundToInteger, ExactAverage };

/// σ_n(x) = δ^{-d}∫_{x^□}σ, optionally rounded half up to the nearest integer.
ScalarField discretize_density(const LatticeSpec& spec, const ContinuumDensity& sigma, DiscretizeMode mode);

}  // namespace agg
