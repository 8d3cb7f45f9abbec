#pragma once

// Lattice geometry on δ·Z^d: boxes, per-site fields, the discrete Laplacian,
// ε-neighborhoods and the set metrics used to compare aggregation clusters.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agg/errors.hpp"

namespace agg {

inline constexpr int kMaxDim = 4;

/// Integer lattice coordinates; entries past the lattice dimension are zero.
using Coord = std::array<int, kMaxDim>;
/// Physical point in R^d; entries past the dimension are zero.
using Point = std::array<double, kMaxDim>;

Coord make_coord(std::initializer_list<int> values);
Point make_point(std::initializer_list<double> values);

double norm(const Point& p, int dim);
double squared_norm(const Point& p, int dim);

/// A finite box of δ·Z^d. Sites are stored flat in row-major order (last axis fastest).
class LatticeSpec {
 public:
  LatticeSpec(int dim, double spacing, const Coord& lo, const Coord& extent);

  /// Box [-half_width, half_width]^d in lattice coordinates.
  static LatticeSpec centered(int dim, double spacing, int half_width);
  /// Smallest box of sites covering the physical cube center + [-radius, radius]^d.
  static LatticeSpec covering(int dim, double spacing, const Point& center, double radius);
  /// Smallest box of sites covering the physical box [lo, hi].
  static LatticeSpec covering_box(int dim, double spacing, const Point& lo, const Point& hi);

  int dim() const noexcept { return dim_; }
  double spacing() const noexcept { return spacing_; }
  const Coord& lo() const noexcept { return lo_; }
  const Coord& extent() const noexcept { return extent_; }
  /// Inclusive upper corner.
  Coord hi() const noexcept;
  /// Physical location of the lowest corner site, δ·lo.
  Point origin_offset() const noexcept;
  std::size_t size() const noexcept { return size_; }
  std::ptrdiff_t stride(int axis) const noexcept { return strides_[axis]; }

  bool contains(const Coord& c) const noexcept;
  /// Flat index of an in-box site; unchecked.
  std::size_t index(const Coord& c) const noexcept;
  std::size_t checked_index(const Coord& c) const;
  Coord coord(std::size_t index) const noexcept;
  Point point(const Coord& c) const noexcept;
  Point point(std::size_t index) const noexcept { return point(coord(index)); }

  /// True for sites on the outermost layer of the box.
  bool on_frame(const Coord& c) const noexcept;
  bool on_frame(std::size_t index) const noexcept { return on_frame(coord(index)); }

  /// Flat offsets to the 2d neighbors in the order +e_1..+e_d, -e_1..-e_d.
  std::vector<std::ptrdiff_t> neighbor_offsets() const;

  std::string describe() const;

  bool operator==(const LatticeSpec& other) const = default;

 private:
  int dim_;
  double spacing_;
  Coord lo_{};
  Coord extent_{};
  std::array<std::ptrdiff_t, kMaxDim> strides_{};
  std::size_t size_ = 0;
};

/// One value per site of a LatticeSpec.
template <typename T>
class LatticeField {
 public:
  explicit LatticeField(LatticeSpec spec, T fill = T{})
      : spec_(std::move(spec)), values_(spec_.size(), fill) {}

  LatticeField(LatticeSpec spec, std::vector<T> values) : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.size() != spec_.size()) {
      throw ValidationError("field length " + std::to_string(values_.size()) + " does not match lattice size " +
                            std::to_string(spec_.size()));
    }
  }

  const LatticeSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  T& at(const Coord& c) { return values_[spec_.checked_index(c)]; }
  const T& at(const Coord& c) const { return values_[spec_.checked_index(c)]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool operator==(const LatticeField& other) const = default;

 private:
  LatticeSpec spec_;
  std::vector<T> values_;
};

using ScalarField = LatticeField<double>;
using DomainMask = LatticeField<std::uint8_t>;

/// Visits every site c of the box with lo <= c <= hi (clipped), in row-major order, as fn(index, coord).
template <typename Fn>
void for_each_site_in(const LatticeSpec& spec, Coord lo, Coord hi, Fn&& fn) {
  const int d = spec.dim();
  const Coord box_hi = spec.hi();
  for (int i = 0; i < d; ++i) {
    lo[i] = std::max(lo[i], spec.lo()[i]);
    hi[i] = std::min(hi[i], box_hi[i]);
    if (lo[i] > hi[i]) return;
  }
  Coord c = lo;
  while (true) {
    fn(spec.index(c), c);
    int axis = d - 1;
    while (axis >= 0) {
      if (++c[axis] <= hi[axis]) break;
      c[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) return;
  }
}

/// Sites whose cells may meet the physical box [lo, hi], padded by one site.
std::pair<Coord, Coord> site_range(const LatticeSpec& spec, const Point& lo, const Point& hi);

std::size_t count(const DomainMask& mask);
double sum(const ScalarField& field);
double max_abs(const ScalarField& field);
std::vector<Coord> sites_of(const DomainMask& mask);

DomainMask mask_union(const DomainMask& a, const DomainMask& b);
DomainMask mask_intersection(const DomainMask& a, const DomainMask& b);
/// Copies a mask onto another box; sites outside the new box must be empty.
DomainMask remap(const DomainMask& mask, const LatticeSpec& target);
ScalarField remap(const ScalarField& field, const LatticeSpec& target);

/// Site whose half-open box (x - δ/2, x + δ/2]^d holds the point; ties round up per axis.
Coord site_of_point(const LatticeSpec& spec, const Point& x);

/// δ^{-2}((1/2d)Σ_{y~x} f(y) - f(x)), with zero padding outside the box.
ScalarField discrete_laplacian(const ScalarField& f);

/// Squared distance (in lattice units) from every site to the nearest set site of `target`.
/// Sites with no target anywhere get -1.
std::vector<std::int64_t> squared_distance_map(const DomainMask& target, bool outside_counts);

/// Sites whose closed ε-ball of lattice sites lies inside the mask (sites beyond the box count as outside).
DomainMask inner_neighborhood(const DomainMask& mask, double epsilon);
/// Sites within Euclidean distance ε of some set site.
DomainMask outer_neighborhood(const DomainMask& mask, double epsilon);

/// δ^d times the number of sites in exactly one mask.
double symmetric_difference_volume(const DomainMask& a, const DomainMask& b);

/// Hausdorff distance between site sets; +inf when exactly one is empty.
double hausdorff_distance(const DomainMask& a, const DomainMask& b);
/// max(d_H(A, B), d_H(A^c, B^c)) with complements taken inside the box.
double inner_outer_hausdorff(const DomainMask& a, const DomainMask& b);

enum class ShapeVerdict { Pass, FailInner, FailOuter };

struct ShapeCheck {
  ShapeVerdict verdict = ShapeVerdict::Pass;
  /// Sites of D_ε missing from A.
  std::vector<Coord> missing_inner;
  /// Sites of A outside D^ε.
  std::vector<Coord> outside_outer;

  bool passed() const noexcept { return verdict == ShapeVerdict::Pass; }
};

std::string to_string(ShapeVerdict verdict);

/// D_ε ∩ lattice ⊂ A ⊂ D^ε with D given as a mask on the same lattice.
ShapeCheck check_shape_convergence(const DomainMask& a, const DomainMask& d, double epsilon);

}  // namespace agg
