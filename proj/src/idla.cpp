#include "agg/idla.hpp"

#include <cmath>

namespace agg {

namespace {

struct Lattice {
  std::vector<std::ptrdiff_t> offsets;
  std::vector<std::uint8_t> frame;

  explicit Lattice(const LatticeSpec& spec) : offsets(spec.neighbor_offsets()), frame(spec.size(), 0) {
    for (std::size_t i = 0; i < spec.size(); ++i) frame[i] = spec.on_frame(i) ? 1 : 0;
  }
};

std::uint64_t walk_out(DomainMask& cluster, const Lattice& lattice, std::size_t i, RngStream& rng) {
  const auto degree = static_cast<std::uint32_t>(lattice.offsets.size());
  std::uint64_t steps = 0;
  while (cluster[i]) {
    i = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + lattice.offsets[rng.below(degree)]);
    ++steps;
    if (lattice.frame[i]) throw BoxTooSmallError("random walk reached the frame of " + cluster.spec().describe());
  }
  cluster[i] = 1;
  return steps;
}

}  // namespace

IdlaResult idla_aggregate(const ScalarField& sigma_n, std::uint64_t seed) {
  const LatticeSpec& spec = sigma_n.spec();
  for (double v : sigma_n.values()) {
    if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError("idla_aggregate: σ_n must hold nonnegative integers");
  }
  IdlaResult result{DomainMask(spec), 0, 0};
  const Lattice lattice(spec);
  for (std::size_t start = 0; start < spec.size(); ++start) {
    const auto count = static_cast<std::uint64_t>(sigma_n[start]);
    for (std::uint64_t p = 0; p < count; ++p) {
      RngStream rng(seed, result.particles++);
      result.steps += walk_out(result.cluster, lattice, start, rng);
    }
  }
  return result;
}

DomainMask df_smash_sum(const DomainMask& a, const DomainMask& b, std::uint64_t seed) {
  if (!(a.spec() == b.spec())) throw ValidationError("df_smash_sum: masks use different lattices");
  std::vector<Coord> order;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) order.push_back(a.spec().coord(i));
  }
  return df_smash_sum(a, b, order, seed);
}

DomainMask df_smash_sum(const DomainMask& a, const DomainMask& b, const std::vector<Coord>& order,
                        std::uint64_t seed) {
  if (!(a.spec() == b.spec())) throw ValidationError("df_smash_sum: masks use different lattices");
  const LatticeSpec& spec = a.spec();
  DomainMask cluster = mask_union(a, b);
  const Lattice lattice(spec);
  std::uint64_t particle = 0;
  for (const Coord& c : order) {
    const std::size_t i = spec.checked_index(c);
    if (!(a[i] && b[i])) throw ValidationError("df_smash_sum: walk start outside A ∩ B");
    RngStream rng(seed, particle++);
    walk_out(cluster, lattice, i, rng);
  }
  return cluster;
}

ExitTimeEstimate mc_ball_exit_time(double radius, double spacing, std::uint64_t trials, std::uint64_t seed,
                                   int dim) {
  if (trials == 0) throw ValidationError("mc_ball_exit_time: trials must be positive");
  if (!(radius > 0.0) || !(spacing > 0.0)) throw ValidationError("mc_ball_exit_time: radius and spacing must be positive");
  if (dim < 2 || dim > kMaxDim) throw WrongDimensionError("mc_ball_exit_time: unsupported dimension");
  const double reach = radius / spacing;
  const double reach2 = reach * reach;
  std::vector<double> samples(trials);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    std::array<std::int64_t, kMaxDim> x{};
    std::uint64_t steps = 0;
    double r2 = 0.0;
    do {
      const std::uint32_t k = rng.below(static_cast<std::uint32_t>(2 * dim));
      const int axis = static_cast<int>(k % static_cast<std::uint32_t>(dim));
      x[axis] += k < static_cast<std::uint32_t>(dim) ? 1 : -1;
      ++steps;
      r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += static_cast<double>(x[a] * x[a]);
    } while (r2 < reach2);
    samples[static_cast<std::size_t>(t)] = static_cast<double>(steps);
  }
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  ExitTimeEstimate est;
  est.mean = mean;
  est.trials = trials;
  est.standard_error = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
  return est;
}

}  // namespace agg
