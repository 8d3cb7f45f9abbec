#pragma once

// Rotor-router aggregation. Each site carries a rotor pointing at one of its
// 2d neighbors; a particle at an occupied site advances that rotor to the next
// direction in a fixed cyclic order and then steps along it.

#include <cstdint>
#include <string>
#include <vector>

#include "agg/lattice.hpp"

namespace agg {

/// Cyclic order of the 2d unit vectors: N, E, S, W in d = 2; +e_1..+e_d, -e_1..-e_d otherwise.
struct DirectionOrder {
  int dim = 2;
  std::vector<Coord> directions;

  static DirectionOrder standard(int dim);
  int size() const noexcept { return static_cast<int>(directions.size()); }
  std::string describe() const;
};

class RotorField {
 public:
  /// Every rotor set to the same direction index.
  static RotorField uniform(const LatticeSpec& spec, int direction = 0);
  /// Independent uniform directions from a seeded stream.
  static RotorField random(const LatticeSpec& spec, std::uint64_t seed);

  RotorField(LatticeSpec spec, DirectionOrder order, std::vector<std::uint8_t> dirs);

  const LatticeSpec& spec() const noexcept { return spec_; }
  const DirectionOrder& order() const noexcept { return order_; }
  std::uint8_t& operator[](std::size_t i) noexcept { return dirs_[i]; }
  std::uint8_t operator[](std::size_t i) const noexcept { return dirs_[i]; }
  const std::vector<std::uint8_t>& values() const noexcept { return dirs_; }

  bool operator==(const RotorField&) const = default;

 private:
  LatticeSpec spec_;
  DirectionOrder order_;
  std::vector<std::uint8_t> dirs_;
};

bool operator==(const DirectionOrder& a, const DirectionOrder& b);

enum class RotorRule {
  Standard,
  /// Particles arriving on the positive x-axis are removed.
  AbsorbingAxis,
  /// Occupied sites of the positive x-axis send the particle to -e_2 without rotating.
  DirectedAxis,
};

struct RotorAggState {
  RotorAggState(DomainMask occupied, RotorField rotors, bool track_edges, RotorRule rule = RotorRule::Standard);

  DomainMask occupied;
  RotorField rotors;
  /// Particles emitted from each site.
  std::vector<std::uint64_t> emissions;
  /// Per site and direction index: particles routed from the site along that direction.
  std::vector<std::uint64_t> routed;
  bool track_edges;
  RotorRule rule;
  std::uint64_t steps = 0;
  std::uint64_t absorbed = 0;

  /// δ² · emissions.
  ScalarField odometer() const;
  /// κ(x, x + direction): net crossings from x to its neighbor.
  std::int64_t net_crossings(std::size_t site, int direction) const;
};

/// Walks one particle from start until it reaches an unoccupied site, which it
/// occupies. Returns that site, or the absorbing site for AbsorbingAxis (left unoccupied).
Coord rotor_walk_until_unoccupied(RotorAggState& state, const Coord& start);

/// Releases σ_n(y) particles at every site y in raster order.
RotorAggState rotor_aggregate(const ScalarField& sigma_n, RotorField initial_rotors, bool track_edges = false,
                              RotorRule rule = RotorRule::Standard);

/// Starting from A ∪ B occupied, one extra particle per site of A ∩ B (raster order).
DomainMask rotor_smash_sum(const DomainMask& a, const DomainMask& b, RotorField initial_rotors);

/// m particles from the origin of Z², rotors initially pointing north.
DomainMask rotor_variant_absorbing_axis(std::uint64_t m);
DomainMask rotor_variant_directed_axis(std::uint64_t m);

/// max over tracked edges of |ρ(x,y)| with ρ = δ^{-1}∇u(x,y) + 2dκ(x,y).
double odometer_flow_check(const RotorAggState& state);

}  // namespace agg
