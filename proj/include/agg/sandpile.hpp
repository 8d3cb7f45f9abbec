#pragma once

// Divisible sandpile: a site with mass above 1 keeps 1 and splits the excess
// equally among its 2d neighbors. The odometer stores δ² times the total mass
// emitted, so that Δu = ν - σ with the δ-scaled Laplacian.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "agg/continuum.hpp"
#include "agg/lattice.hpp"

namespace agg {

struct TopplingSchedule {
  enum class Policy { Raster, RedBlack, PriorityMaxExcess, ExplicitList };

  Policy policy = Policy::RedBlack;
  /// Visiting order for ExplicitList, cycled until stable.
  std::vector<Coord> sites;

  static TopplingSchedule raster() { return {Policy::Raster, {}}; }
  static TopplingSchedule red_black() { return {Policy::RedBlack, {}}; }
  static TopplingSchedule priority_max_excess() { return {Policy::PriorityMaxExcess, {}}; }
  static TopplingSchedule explicit_list(std::vector<Coord> order) { return {Policy::ExplicitList, std::move(order)}; }
};

std::string to_string(TopplingSchedule::Policy policy);

struct SandpileState {
  explicit SandpileState(ScalarField initial);

  ScalarField mass;
  ScalarField odometer;
  /// Mass pushed past the box by topple_site; stays 0 in valid runs.
  double lost = 0.0;
  std::size_t topplings = 0;
};

/// Topples x once: keeps 1, sends (mass - 1)/2d to each neighbor.
void topple_site(SandpileState& state, const Coord& x);

struct StabilizeOptions {
  TopplingSchedule schedule;
  double tol = 1e-10;
  /// Receives "sweep,active_sites,max_excess" lines when set.
  std::ostream* progress = nullptr;
};

struct SandpileResult {
  ScalarField mass;
  ScalarField odometer;
  DomainMask domain;
  std::size_t sweeps = 0;
  std::size_t topplings = 0;
};

/// Topples until every site has mass <= 1 + tol. Throws BoxTooSmallError if
/// mass would reach the frame of the box.
SandpileResult stabilize(const ScalarField& sigma, const StabilizeOptions& options = {});

struct AbelianReport {
  double max_odometer_gap = 0.0;
  double max_mass_gap = 0.0;
  bool domains_equal = true;
  bool passed = true;
};

AbelianReport verify_abelian(const ScalarField& sigma, const std::vector<TopplingSchedule>& schedules,
                             double tol = 1e-10);

struct LeastActionVerdict {
  bool accepted = false;
  std::optional<Coord> witness;
  std::string reason;
};

/// Accepts u_candidate iff it is nonnegative, stabilizing (σ + Δu <= 1 + tol)
/// and dominates the true odometer up to 10·tol.
LeastActionVerdict least_action_check(const ScalarField& sigma, const ScalarField& u_candidate, double tol = 1e-10);

/// max over non-frame sites of |Δu - (ν - σ)|.
double odometer_identity_residual(const ScalarField& sigma, const ScalarField& nu, const ScalarField& u);

/// Physical half-width of a box that holds the aggregate of σ: the larger of
/// 1.5·M^{1/d}·R_s and R_s + 1.5·(mass/ω_d)^{1/d}, plus 4δ.
double aggregation_radius(int dim, double spacing, double bound, double support_radius, double total_mass);
/// Box centered on the support of σ with the half-width above.
LatticeSpec aggregation_box(const ContinuumDensity& sigma, double spacing);
/// Same rule for a lattice density (support taken from its nonzero sites).
LatticeSpec aggregation_box(const ScalarField& sigma_n);

}  // namespace agg
