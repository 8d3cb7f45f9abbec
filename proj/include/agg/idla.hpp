#pragma once

// Internal DLA: particle i walks from its start until it leaves the cluster
// built by particles 1..i-1. Particle i draws its steps from stream i of the
// seed, so clusters are reproducible regardless of threading.

#include <cstdint>
#include <vector>

#include "agg/lattice.hpp"
#include "agg/rng.hpp"

namespace agg {

struct IdlaResult {
  DomainMask cluster;
  std::uint64_t steps = 0;
  std::uint64_t particles = 0;
};

/// Particles are labelled in raster order of their start site, then by multiplicity.
IdlaResult idla_aggregate(const ScalarField& sigma_n, std::uint64_t seed);

/// Diaconis–Fulton sum: from A ∪ B, one walk per site of A ∩ B in raster order.
DomainMask df_smash_sum(const DomainMask& a, const DomainMask& b, std::uint64_t seed);
/// Same with the walks started from the given sites, in the given order (each must lie in A ∩ B).
DomainMask df_smash_sum(const DomainMask& a, const DomainMask& b, const std::vector<Coord>& order,
                        std::uint64_t seed);

struct ExitTimeEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
};

/// Steps for a simple random walk from the origin to leave {x ∈ δZ^d : |x| < r}.
ExitTimeEstimate mc_ball_exit_time(double radius, double spacing, std::uint64_t trials, std::uint64_t seed,
                                   int dim = 2);

}  // namespace agg
