#pragma once

// Obstacle problems γ = -|x|² - Gσ on a lattice box, their least superharmonic
// majorants, and the smash sums and quadrature identities built on them.

#include <optional>
#include <string>
#include <vector>

#include "agg/continuum.hpp"
#include "agg/lattice.hpp"

namespace agg {

enum class ObstacleFlavor { Discrete, Continuum };

struct ObstacleProblem {
  ScalarField gamma;
  ObstacleFlavor flavor = ObstacleFlavor::Discrete;
  /// σ_n for the discrete flavor; σ sampled at the sites for the continuum flavor.
  ScalarField source;
  std::optional<ContinuumDensity> density;

  const LatticeSpec& spec() const noexcept { return gamma.spec(); }
};

/// γ_n = -|x|² - G_nσ_n.
ObstacleProblem build_obstacle_discrete(const ScalarField& sigma_n);
/// γ = -|x|² - Gσ sampled at the sites of the box.
ObstacleProblem build_obstacle_continuum(const ContinuumDensity& sigma, const LatticeSpec& spec);

enum class MajorantMethod {
  /// Projected successive over-relaxation on red/black sites.
  ProjectedSor,
  /// Projected Jacobi with a double buffer.
  ProjectedJacobi,
};

struct MajorantOptions {
  double tol = 1e-8;
  long max_iters = 1'000'000;
  MajorantMethod method = MajorantMethod::ProjectedSor;
  /// Relaxation factor for ProjectedSor; 0 picks 2/(1 + sin(π/N)).
  double omega = 0.0;
  /// Initial s; defaults to γ.
  std::optional<ScalarField> warm_start;
  /// Throw BoxTooSmallError when D reaches the sites next to the frame.
  bool check_box = true;
};

struct MajorantSolution {
  ScalarField s;
  long iterations = 0;
  /// Last max |update|.
  double residual = 0.0;
  /// θ_D: D = {s - γ > θ_D}.
  double threshold = 0.0;
  DomainMask domain;
};

/// Least superharmonic majorant of γ with s = γ on the frame of the box.
MajorantSolution least_majorant(const ObstacleProblem& problem, const MajorantOptions& options = {});

/// u = s - γ.
ScalarField odometer_from_majorant(const ObstacleProblem& problem, const MajorantSolution& solution);

/// Lattice picture of the region occupied in the limit: D ∪ {σ ≥ 1}, plus the
/// sites outside D whose discrete fill 1 + Δs is at least 1/2.
DomainMask occupied_limit(const ContinuumDensity& sigma, const LatticeSpec& spec, double tol = 1e-8);

/// A ⊕ B = A ∪ B ∪ D for σ = 1_A + 1_B, rasterized on the box, with the
/// half-filled sites of occupied_limit.
DomainMask smash_sum_continuum(const ContinuumSet& a, const ContinuumSet& b, const LatticeSpec& spec,
                               double tol = 1e-8);
/// Smash sum of any number of sets: σ = Σ 1_{A_i}.
DomainMask smash_sum_continuum(const std::vector<ContinuumSet>& sets, const LatticeSpec& spec, double tol = 1e-8);

struct AssociativityReport {
  DomainMask left;    // (A ⊕ B) ⊕ C
  DomainMask right;   // A ⊕ (B ⊕ C)
  DomainMask direct;  // σ = 1_A + 1_B + 1_C
  double left_right = 0.0;
  double left_direct = 0.0;
  double right_direct = 0.0;
  double total_volume = 0.0;
};

AssociativityReport associativity_check(const ContinuumSet& a, const ContinuumSet& b, const ContinuumSet& c,
                                        const LatticeSpec& spec, double tol = 1e-8);

/// Test functions for quadrature identities.
struct TestFunction {
  enum class Kind {
    Constant,
    Affine,
    /// g(pole, ·)
    Green,
    /// -|x - center|²
    NegativeQuadratic,
  };

  Kind kind = Kind::Constant;
  double scale = 1.0;
  double constant = 1.0;
  /// Gradient (Affine), pole (Green) or center (NegativeQuadratic).
  Point vector{};

  static TestFunction constant_function(double c);
  static TestFunction affine(double c, const Point& gradient);
  static TestFunction green(const Point& pole);
  static TestFunction negative_quadratic(const Point& center);
  TestFunction negated() const;

  double operator()(const Point& x, int dim) const;
  bool harmonic() const noexcept { return kind == Kind::Constant || kind == Kind::Affine; }
  bool superharmonic() const noexcept { return harmonic() || scale > 0.0; }
  std::string describe() const;
};

struct QuadratureResult {
  double lhs = 0.0;  // ∫_D h
  double rhs = 0.0;  // ∫ h dσ
  double margin = 0.0;  // rhs - lhs
  bool harmonic = false;
};

/// Integrates h over the cells of D and against σ; cell, ball and box integrals are exact.
QuadratureResult quadrature_check(const DomainMask& d, const ContinuumDensity& sigma, const TestFunction& h);

}  // namespace agg
