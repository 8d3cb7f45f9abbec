#include "agg/sandpile.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace agg {

namespace {

struct Engine {
  const LatticeSpec& spec;
  std::vector<double>& mass;
  std::vector<double>& odometer;
  std::vector<std::ptrdiff_t> neighbors;
  std::vector<std::uint8_t> near_frame;
  double share;
  double scale;
  Coord lo{};
  Coord hi{};
  std::size_t topplings = 0;

  Engine(const LatticeSpec& s, std::vector<double>& m, std::vector<double>& u)
      : spec(s), mass(m), odometer(u), neighbors(s.neighbor_offsets()), near_frame(s.size(), 0) {
    share = 1.0 / static_cast<double>(neighbors.size());
    scale = s.spacing() * s.spacing();
    const Coord h = s.hi();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Coord c = s.coord(i);
      for (int a = 0; a < s.dim(); ++a) {
        if (c[a] <= s.lo()[a] + 1 || c[a] >= h[a] - 1) near_frame[i] = 1;
      }
    }
    lo = h;
    hi = s.lo();
  }

  void include(const Coord& c) {
    for (int a = 0; a < spec.dim(); ++a) {
      lo[a] = std::min(lo[a], c[a] - 1);
      hi[a] = std::max(hi[a], c[a] + 1);
    }
  }

  bool empty_region() const {
    for (int a = 0; a < spec.dim(); ++a) {
      if (lo[a] > hi[a]) return true;
    }
    return false;
  }

  void topple(std::size_t i, const Coord& c) {
    if (near_frame[i]) {
      throw BoxTooSmallError("sandpile mass reached the frame of " + spec.describe() +
                             "; enlarge the box (see aggregation_box)");
    }
    const double excess = mass[i] - 1.0;
    const double part = excess * share;
    mass[i] = 1.0;
    for (auto off : neighbors) mass[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)] += part;
    odometer[i] += scale * excess;
    ++topplings;
    include(c);
  }
};

}  // namespace

std::string to_string(TopplingSchedule::Policy policy) {
  switch (policy) {
    case TopplingSchedule::Policy::Raster: return "raster";
    case TopplingSchedule::Policy::RedBlack: return "red-black";
    case TopplingSchedule::Policy::PriorityMaxExcess: return "priority-max-excess";
    case TopplingSchedule::Policy::ExplicitList: return "explicit-list";
  }
  return "unknown";
}

SandpileState::SandpileState(ScalarField initial) : mass(std::move(initial)), odometer(mass.spec()) {}

void topple_site(SandpileState& state, const Coord& x) {
  const LatticeSpec& spec = state.mass.spec();
  const std::size_t i = spec.checked_index(x);
  const double old = state.mass[i];
  if (!(old > 1.0)) {
    throw IllegalTopplingError("toppling requires mass > 1; site holds " + std::to_string(old));
  }
  const double excess = old - 1.0;
  const double part = excess / (2.0 * spec.dim());
  state.mass[i] = 1.0;
  for (int a = 0; a < spec.dim(); ++a) {
    for (int sgn : {1, -1}) {
      Coord y = x;
      y[a] += sgn;
      if (spec.contains(y)) {
        state.mass[spec.index(y)] += part;
      } else {
        state.lost += part;
      }
    }
  }
  state.odometer[i] += spec.spacing() * spec.spacing() * excess;
  ++state.topplings;
}

SandpileResult stabilize(const ScalarField& sigma, const StabilizeOptions& options) {
  const LatticeSpec& spec = sigma.spec();
  const double tol = options.tol;
  if (!(tol > 0.0)) throw ValidationError("stabilize: tol must be positive");
  for (double v : sigma.values()) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("stabilize: σ must be finite and nonnegative");
  }

  std::vector<double> mass(sigma.values().begin(), sigma.values().end());
  std::vector<double> odometer(spec.size(), 0.0);
  Engine engine(spec, mass, odometer);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (mass[i] > 1.0 + tol) engine.include(spec.coord(i));
  }

  const double threshold = 1.0 + tol;
  std::size_t sweeps = 0;
  auto log = [&](std::size_t active, double worst) {
    if (options.progress != nullptr) *options.progress << sweeps << ',' << active << ',' << worst << '\n';
  };

  switch (options.schedule.policy) {
    case TopplingSchedule::Policy::Raster:
    case TopplingSchedule::Policy::RedBlack: {
      const bool red_black = options.schedule.policy == TopplingSchedule::Policy::RedBlack;
      const int passes = red_black ? 2 : 1;
      while (!engine.empty_region()) {
        double worst = 0.0;
        std::size_t active = 0;
        for (int pass = 0; pass < passes; ++pass) {
          const Coord lo = engine.lo;
          const Coord hi = engine.hi;
          for_each_site_in(spec, lo, hi, [&](std::size_t i, const Coord& c) {
            if (mass[i] <= threshold) return;
            if (red_black) {
              int parity = 0;
              for (int a = 0; a < spec.dim(); ++a) parity += c[a];
              if ((parity & 1) != pass) return;
            }
            worst = std::max(worst, mass[i] - 1.0);
            ++active;
            engine.topple(i, c);
          });
        }
        ++sweeps;
        log(active, worst);
        if (active == 0) break;
      }
      break;
    }
    case TopplingSchedule::Policy::PriorityMaxExcess: {
      std::priority_queue<std::pair<double, std::size_t>> heap;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        if (mass[i] > threshold) heap.emplace(mass[i], i);
      }
      while (!heap.empty()) {
        const std::size_t i = heap.top().second;
        heap.pop();
        if (mass[i] <= threshold) continue;
        engine.topple(i, spec.coord(i));
        ++sweeps;
        for (auto off : engine.neighbors) {
          const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off);
          if (mass[j] > threshold) heap.emplace(mass[j], j);
        }
      }
      break;
    }
    case TopplingSchedule::Policy::ExplicitList: {
      std::vector<std::size_t> order;
      order.reserve(options.schedule.sites.size());
      for (const Coord& c : options.schedule.sites) order.push_back(spec.checked_index(c));
      while (true) {
        std::size_t active = 0;
        double worst = 0.0;
        for (std::size_t i : order) {
          if (mass[i] <= threshold) continue;
          worst = std::max(worst, mass[i] - 1.0);
          ++active;
          engine.topple(i, spec.coord(i));
        }
        ++sweeps;
        log(active, worst);
        const bool unstable = std::any_of(mass.begin(), mass.end(), [&](double m) { return m > threshold; });
        if (!unstable) break;
        if (active == 0) {
          throw ValidationError("explicit toppling list never visits a site that still has excess mass");
        }
      }
      break;
    }
  }

  SandpileResult result{ScalarField(spec, std::move(mass)), ScalarField(spec, std::move(odometer)), DomainMask(spec),
                        sweeps, engine.topplings};
  for (std::size_t i = 0; i < spec.size(); ++i) result.domain[i] = result.mass[i] >= 1.0 - tol ? 1 : 0;
  return result;
}

AbelianReport verify_abelian(const ScalarField& sigma, const std::vector<TopplingSchedule>& schedules, double tol) {
  AbelianReport report;
  std::vector<SandpileResult> runs;
  for (const auto& s : schedules) runs.push_back(stabilize(sigma, {s, tol, nullptr}));
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        report.max_odometer_gap =
            std::max(report.max_odometer_gap, std::abs(runs[a].odometer[i] - runs[b].odometer[i]));
        report.max_mass_gap = std::max(report.max_mass_gap, std::abs(runs[a].mass[i] - runs[b].mass[i]));
      }
      report.domains_equal = report.domains_equal && runs[a].domain == runs[b].domain;
    }
  }
  report.passed = report.max_odometer_gap <= 10 * tol && report.max_mass_gap <= 10 * tol;
  return report;
}

LeastActionVerdict least_action_check(const ScalarField& sigma, const ScalarField& u_candidate, double tol) {
  const LatticeSpec& spec = sigma.spec();
  if (!(u_candidate.spec() == spec)) throw ValidationError("least_action_check: lattice mismatch");
  LeastActionVerdict verdict;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (u_candidate[i] < 0.0) {
      verdict.witness = spec.coord(i);
      verdict.reason = "candidate is negative";
      return verdict;
    }
  }
  const ScalarField lap = discrete_laplacian(u_candidate);
  const double slack = tol + 64 * 2.2e-16 * max_abs(u_candidate) / (spec.spacing() * spec.spacing());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (sigma[i] + lap[i] > 1.0 + slack) {
      verdict.witness = spec.coord(i);
      verdict.reason = "candidate is not stabilizing";
      return verdict;
    }
  }
  const SandpileResult truth = stabilize(sigma, {TopplingSchedule::red_black(), tol, nullptr});
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (u_candidate[i] < truth.odometer[i] - 10 * tol) {
      verdict.witness = spec.coord(i);
      verdict.reason = "stabilizing candidate lies below the odometer";
      return verdict;
    }
  }
  verdict.accepted = true;
  return verdict;
}

double odometer_identity_residual(const ScalarField& sigma, const ScalarField& nu, const ScalarField& u) {
  const LatticeSpec& spec = sigma.spec();
  if (!(nu.spec() == spec) || !(u.spec() == spec)) throw ValidationError("odometer identity: lattice mismatch");
  const ScalarField lap = discrete_laplacian(u);
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.on_frame(i)) continue;
    worst = std::max(worst, std::abs(lap[i] - (nu[i] - sigma[i])));
  }
  return worst;
}

double aggregation_radius(int dim, double spacing, double bound, double support_radius, double total_mass) {
  const double inflated = 1.5 * std::pow(std::max(bound, 1.0), 1.0 / dim) * support_radius;
  const double ball = support_radius + 1.5 * std::pow(total_mass / unit_ball_volume(dim), 1.0 / dim);
  return std::max(inflated, ball) + 4.0 * spacing;
}

LatticeSpec aggregation_box(const ContinuumDensity& sigma, double spacing) {
  const int d = sigma.dim();
  const auto [lo, hi] = sigma.support_bounds();
  Point center{};
  double r2 = 0.0;
  for (int i = 0; i < d; ++i) {
    center[i] = 0.5 * (lo[i] + hi[i]);
    r2 += 0.25 * (hi[i] - lo[i]) * (hi[i] - lo[i]);
  }
  const double radius = aggregation_radius(d, spacing, sigma.bound(), std::sqrt(r2), sigma.total_mass());
  return LatticeSpec::covering(d, spacing, center, radius);
}

LatticeSpec aggregation_box(const ScalarField& sigma_n) {
  const LatticeSpec& spec = sigma_n.spec();
  const int d = spec.dim();
  const double delta = spec.spacing();
  Coord lo = spec.hi();
  Coord hi = spec.lo();
  double bound = 0.0;
  double mass = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (sigma_n[i] == 0.0) continue;
    any = true;
    const Coord c = spec.coord(i);
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
    bound = std::max(bound, sigma_n[i]);
    mass += sigma_n[i];
  }
  if (!any) return spec;
  Point center{};
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) {
    center[a] = 0.5 * delta * (lo[a] + hi[a]);
    const double half = 0.5 * delta * (hi[a] - lo[a] + 1);
    r2 += half * half;
  }
  const double radius = aggregation_radius(d, delta, bound, std::sqrt(r2), mass * std::pow(delta, d));
  return LatticeSpec::covering(d, delta, center, radius);
}

}  // namespace agg
