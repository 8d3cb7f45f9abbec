#pragma once

// Harmonic potentials in R^d and on δ·Z^d.
//
// Normalization follows the random-walk convention: the continuum kernel is
// g(x,y) = -(2/π)log|x-y| in d = 2 and a_d|x-y|^{2-d} with a_d = 2/((d-2)ω_d)
// otherwise, so that the discrete Laplacian δ^{-2}(mean of neighbors - f)
// of the lattice kernel g_n is -δ^{-d} at the pole.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "agg/continuum.hpp"
#include "agg/lattice.hpp"

namespace agg {

/// a_d = 2/((d-2)ω_d), d >= 3.
double kernel_constant(int dim);

double continuum_kernel(const Point& x, const Point& y, int dim);

/// G1_B(x) for B = B(center, r), continuous across |x - center| = r.
double ball_potential(const Point& center, double radius, const Point& x, int dim);

/// G1_Q(x) for the box Q = [lo, hi]; closed form in d = 2, adaptive cubature otherwise.
double box_potential(const Point& lo, const Point& hi, const Point& x, int dim);

/// Gσ(x) = ∫ g(x,y)σ(y)dy.
double continuum_potential(const ContinuumDensity& sigma, const Point& x);

/// Gσ sampled at every site of the box. Cell regions on the same lattice use a
/// precomputed per-offset cell potential, so cost is cells × sites lookups.
ScalarField continuum_potential_field(const ContinuumDensity& sigma, const LatticeSpec& spec);

struct KernelTableInfo {
  /// Far-field constant κ in a(x) ≈ (2/π)log|x| + κ + c cos(4φ)/|x|² + (c₄cos(4φ) + c₈cos(8φ))/|x|⁴ (d = 2 only).
  double kappa = 0.0;
  double correction = 0.0;
  std::array<double, 2> higher{};
  /// Largest |a - fit| over the fitting annulus 0.8R <= |x| <= R (d = 2), or the
  /// largest relative gap to a_d|x|^{2-d} on the table edge (d >= 3).
  double fit_residual = 0.0;
  double tolerance = 0.0;
  /// Residual of the discrete Poisson solve (d >= 3) or quadrature refinement change (d = 2).
  double construction_error = 0.0;
};

/// Potential kernel a(x) on Z² or Green's function g_1(x) on Z^d (d >= 3),
/// tabulated on the orthant 0 <= x_i <= R and extended by its asymptotics beyond.
class KernelTable {
 public:
  static KernelTable build(int dim, int radius);
  static KernelTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int dim() const noexcept { return dim_; }
  int radius() const noexcept { return radius_; }
  const KernelTableInfo& info() const noexcept { return info_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Tabulated value; |offset|_∞ must be <= radius.
  double table_value(const Coord& offset) const;
  /// Asymptotic expansion used outside the table.
  double far_field(const Coord& offset) const;
  double operator()(const Coord& offset) const;

 private:
  KernelTable(int dim, int radius, std::vector<double> values, KernelTableInfo info);
  std::size_t orthant_index(const Coord& abs_offset) const;
  void fit_far_field();

  int dim_ = 2;
  int radius_ = 0;
  std::vector<double> values_;
  KernelTableInfo info_;
};

int default_kernel_radius(int dim);

/// Process-wide table for the dimension, built once and cached on disk under
/// $AGGLAB_CACHE_DIR (default ~/.cache/agglab).
const KernelTable& kernel_table(int dim);

/// a(x) on Z², with a(0) = 0.
double potential_kernel_2d(int x, int y);

/// δ^{2-d} g_1(offset) for d >= 3.
double discrete_green(const Coord& offset, int dim, double spacing = 1.0);

/// g_n(x, y) for x - y = δ·offset on the spec's lattice.
double lattice_kernel(const LatticeSpec& spec, const Coord& offset);

/// G_nσ_n(x) = δ^d Σ_y g_n(x, y)σ_n(y), by direct summation over the support.
ScalarField discrete_potential(const ScalarField& sigma_n);
ScalarField discrete_potential(const ScalarField& sigma_n, const KernelTable& table);

/// k steps of the lazy walk average: stay with probability 1/2, move to each neighbor with 1/(4d).
ScalarField smooth(const ScalarField& f, int steps);

}  // namespace agg
