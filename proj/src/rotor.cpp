#include "agg/rotor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "agg/rng.hpp"

namespace agg {

namespace {

void check_integer_density(const ScalarField& sigma_n, const char* who) {
  for (double v : sigma_n.values()) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 4e9) {
      throw ValidationError(std::string(who) + ": σ_n must hold nonnegative integers");
    }
  }
}

bool on_positive_axis(const Coord& c) { return c[0] > 0 && c[1] == 0; }

struct Walker {
  const LatticeSpec& spec;
  std::vector<std::ptrdiff_t> offsets;
  std::vector<std::uint8_t> frame;
  int degree;

  explicit Walker(const LatticeSpec& s, const DirectionOrder& order)
      : spec(s), frame(s.size(), 0), degree(order.size()) {
    for (const Coord& dir : order.directions) {
      std::ptrdiff_t off = 0;
      for (int a = 0; a < s.dim(); ++a) off += dir[a] * s.stride(a);
      offsets.push_back(off);
    }
    for (std::size_t i = 0; i < s.size(); ++i) frame[i] = s.on_frame(i) ? 1 : 0;
  }
};

// Walks from site i until the particle settles or is absorbed; returns the final site.
std::size_t walk(RotorAggState& state, const Walker& walker, std::size_t i) {
  constexpr int south = 2;
  while (true) {
    const bool axis = state.rule != RotorRule::Standard && on_positive_axis(walker.spec.coord(i));
    if (axis && state.rule == RotorRule::AbsorbingAxis) {
      ++state.absorbed;
      return i;
    }
    if (!state.occupied[i]) {
      state.occupied[i] = 1;
      return i;
    }
    int r = state.rotors[i];
    if (axis && state.rule == RotorRule::DirectedAxis) {
      r = south;
    } else {
      r = (r + 1) % walker.degree;
      state.rotors[i] = static_cast<std::uint8_t>(r);
    }
    ++state.emissions[i];
    if (state.track_edges) ++state.routed[i * walker.degree + r];
    ++state.steps;
    i = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + walker.offsets[r]);
    if (walker.frame[i]) throw BoxTooSmallError("rotor walk reached the frame of " + walker.spec.describe());
  }
}

DomainMask run_variant(std::uint64_t m, RotorRule rule) {
  double radius = 2.0 * std::sqrt(static_cast<double>(m) / std::acos(-1.0)) + 4.0;
  while (true) {
    const LatticeSpec spec = LatticeSpec::centered(2, 1.0, static_cast<int>(std::ceil(radius)));
    ScalarField sigma(spec);
    sigma.at(make_coord({0, 0})) = static_cast<double>(m);
    try {
      return rotor_aggregate(sigma, RotorField::uniform(spec, 0), false, rule).occupied;
    } catch (const BoxTooSmallError&) {
      radius *= 1.5;
    }
  }
}

}  // namespace

DirectionOrder DirectionOrder::standard(int dim) {
  DirectionOrder order;
  order.dim = dim;
  if (dim == 2) {
    order.directions = {make_coord({0, 1}), make_coord({1, 0}), make_coord({0, -1}), make_coord({-1, 0})};
    return order;
  }
  for (int sign : {1, -1}) {
    for (int a = 0; a < dim; ++a) {
      Coord c{};
      c[a] = sign;
      order.directions.push_back(c);
    }
  }
  return order;
}

std::string DirectionOrder::describe() const {
  std::ostringstream os;
  for (int k = 0; k < size(); ++k) {
    if (k > 0) os << ',';
    const Coord& v = directions[static_cast<std::size_t>(k)];
    int axis = 0;
    while (axis < dim - 1 && v[axis] == 0) ++axis;
    if (dim == 2) {
      os << (axis == 0 ? (v[0] > 0 ? 'E' : 'W') : (v[1] > 0 ? 'N' : 'S'));
    } else {
      os << (v[axis] > 0 ? "+e" : "-e") << axis + 1;
    }
  }
  return os.str();
}

bool operator==(const DirectionOrder& a, const DirectionOrder& b) {
  return a.dim == b.dim && a.directions == b.directions;
}

RotorField::RotorField(LatticeSpec spec, DirectionOrder order, std::vector<std::uint8_t> dirs)
    : spec_(std::move(spec)), order_(std::move(order)), dirs_(std::move(dirs)) {
  if (dirs_.size() != spec_.size()) throw ValidationError("rotor field length does not match the lattice");
  if (order_.dim != spec_.dim() || order_.size() != 2 * spec_.dim()) {
    throw ValidationError("direction order does not match the lattice dimension");
  }
  for (auto r : dirs_) {
    if (r >= order_.size()) throw ValidationError("rotor direction index out of range");
  }
}

RotorField RotorField::uniform(const LatticeSpec& spec, int direction) {
  if (direction < 0 || direction >= 2 * spec.dim()) throw ValidationError("rotor direction index out of range");
  return RotorField(spec, DirectionOrder::standard(spec.dim()),
                    std::vector<std::uint8_t>(spec.size(), static_cast<std::uint8_t>(direction)));
}

RotorField RotorField::random(const LatticeSpec& spec, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<std::uint8_t> dirs(spec.size());
  for (auto& r : dirs) r = static_cast<std::uint8_t>(rng.below(static_cast<std::uint32_t>(2 * spec.dim())));
  return RotorField(spec, DirectionOrder::standard(spec.dim()), std::move(dirs));
}

RotorAggState::RotorAggState(DomainMask occ, RotorField rot, bool track, RotorRule r)
    : occupied(std::move(occ)), rotors(std::move(rot)), emissions(occupied.size(), 0), track_edges(track), rule(r) {
  if (!(occupied.spec() == rotors.spec())) throw ValidationError("rotor field and occupancy use different lattices");
  if (rule != RotorRule::Standard && occupied.spec().dim() != 2) {
    throw WrongDimensionError("axis rotor variants are defined on Z² only");
  }
  if (track_edges) routed.assign(occupied.size() * static_cast<std::size_t>(rotors.order().size()), 0);
}

ScalarField RotorAggState::odometer() const {
  const double scale = occupied.spec().spacing() * occupied.spec().spacing();
  ScalarField u(occupied.spec());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = scale * static_cast<double>(emissions[i]);
  return u;
}

std::int64_t RotorAggState::net_crossings(std::size_t site, int direction) const {
  if (!track_edges) throw ValidationError("edge crossings were not tracked for this run");
  const LatticeSpec& spec = occupied.spec();
  const int degree = rotors.order().size();
  const Coord& dir = rotors.order().directions[static_cast<std::size_t>(direction)];
  Coord y = spec.coord(site);
  for (int a = 0; a < spec.dim(); ++a) y[a] += dir[a];
  const auto forward = static_cast<std::int64_t>(routed[site * degree + direction]);
  if (!spec.contains(y)) return forward;
  const int back = (direction + spec.dim()) % degree;
  return forward - static_cast<std::int64_t>(routed[spec.index(y) * degree + back]);
}

Coord rotor_walk_until_unoccupied(RotorAggState& state, const Coord& start) {
  const LatticeSpec& spec = state.occupied.spec();
  const Walker walker(spec, state.rotors.order());
  return spec.coord(walk(state, walker, spec.checked_index(start)));
}

RotorAggState rotor_aggregate(const ScalarField& sigma_n, RotorField initial_rotors, bool track_edges, RotorRule rule) {
  check_integer_density(sigma_n, "rotor_aggregate");
  const LatticeSpec& spec = sigma_n.spec();
  RotorAggState state(DomainMask(spec), std::move(initial_rotors), track_edges, rule);
  const Walker walker(spec, state.rotors.order());
  for (std::size_t start = 0; start < spec.size(); ++start) {
    const auto count = static_cast<std::uint64_t>(sigma_n[start]);
    for (std::uint64_t p = 0; p < count; ++p) walk(state, walker, start);
  }
  return state;
}

DomainMask rotor_smash_sum(const DomainMask& a, const DomainMask& b, RotorField initial_rotors) {
  if (!(a.spec() == b.spec())) throw ValidationError("rotor_smash_sum: masks use different lattices");
  RotorAggState state(mask_union(a, b), std::move(initial_rotors), false);
  const Walker walker(a.spec(), state.rotors.order());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) walk(state, walker, i);
  }
  return state.occupied;
}

DomainMask rotor_variant_absorbing_axis(std::uint64_t m) { return run_variant(m, RotorRule::AbsorbingAxis); }

DomainMask rotor_variant_directed_axis(std::uint64_t m) { return run_variant(m, RotorRule::DirectedAxis); }

double odometer_flow_check(const RotorAggState& state) {
  if (!state.track_edges) throw ValidationError("odometer_flow_check needs a run with edge tracking");
  const LatticeSpec& spec = state.occupied.spec();
  const int d = spec.dim();
  const auto& dirs = state.rotors.order().directions;
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Coord x = spec.coord(i);
    for (int k = 0; k < state.rotors.order().size(); ++k) {
      Coord y = x;
      for (int a = 0; a < d; ++a) y[a] += dirs[static_cast<std::size_t>(k)][a];
      if (!spec.contains(y)) continue;
      const double gradient = static_cast<double>(state.emissions[spec.index(y)]) -
                              static_cast<double>(state.emissions[i]);
      const double rho = gradient + 2.0 * d * static_cast<double>(state.net_crossings(i, k));
      worst = std::max(worst, std::abs(rho));
    }
  }
  return worst;
}

}  // namespace agg
