#include "agg/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "agg/green.hpp"

namespace agg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ScalarField minus_squared_norm(const LatticeSpec& spec) {
  ScalarField f(spec);
  for (std::size_t i = 0; i < spec.size(); ++i) f[i] = -squared_norm(spec.point(i), spec.dim());
  return f;
}

struct Sweep {
  std::vector<std::size_t> sites[2];
  std::vector<std::ptrdiff_t> neighbors;
  std::vector<std::uint8_t> near_frame;
};

Sweep interior_sweep(const LatticeSpec& spec) {
  Sweep sw;
  sw.neighbors = spec.neighbor_offsets();
  sw.near_frame.assign(spec.size(), 0);
  const Coord hi = spec.hi();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Coord c = spec.coord(i);
    bool frame = false;
    bool near = false;
    int parity = 0;
    for (int a = 0; a < spec.dim(); ++a) {
      frame = frame || c[a] == spec.lo()[a] || c[a] == hi[a];
      near = near || c[a] <= spec.lo()[a] + 1 || c[a] >= hi[a] - 1;
      parity += c[a];
    }
    sw.near_frame[i] = near ? 1 : 0;
    if (!frame) sw.sites[parity & 1].push_back(i);
  }
  return sw;
}

double region_integral(const ContinuumSet& region, const TestFunction& h, int d) {
  using Kind = TestFunction::Kind;
  if (h.kind == Kind::Green) {
    ContinuumDensity single(d);
    single.add(1.0, region);
    return continuum_potential(single, h.vector);
  }
  return std::visit(
      overloaded{
          [&](const BallRegion& b) {
            const double vol = unit_ball_volume(d) * std::pow(b.radius, d);
            if (h.kind == Kind::NegativeQuadratic) {
              double off = 0.0;
              for (int i = 0; i < d; ++i) off += (b.center[i] - h.vector[i]) * (b.center[i] - h.vector[i]);
              return -vol * (off + d * b.radius * b.radius / (d + 2.0));
            }
            return vol * h(b.center, d) / h.scale;
          },
          [&](const BoxRegion& b) {
            double vol = 1.0;
            Point mid{};
            for (int i = 0; i < d; ++i) {
              vol *= b.hi[i] - b.lo[i];
              mid[i] = 0.5 * (b.lo[i] + b.hi[i]);
            }
            if (h.kind == Kind::NegativeQuadratic) {
              double mean = 0.0;
              for (int i = 0; i < d; ++i) {
                const double p = b.hi[i] - h.vector[i];
                const double q = b.lo[i] - h.vector[i];
                mean += (p * p * p - q * q * q) / (3.0 * (b.hi[i] - b.lo[i]));
              }
              return -vol * mean;
            }
            return vol * h(mid, d) / h.scale;
          },
          [&](const CellRegion& c) {
            const LatticeSpec& cs = c.mask.spec();
            const double cell = std::pow(cs.spacing(), d);
            const double spread = d * cs.spacing() * cs.spacing() / 12.0;
            double acc = 0.0;
            for (std::size_t i = 0; i < c.mask.size(); ++i) {
              if (!c.mask[i]) continue;
              const double v = h(cs.point(i), d) / h.scale;
              acc += h.kind == Kind::NegativeQuadratic ? v - spread : v;
            }
            return cell * acc;
          },
          [](const UnionRegion&) -> double { throw ValidationError("quadrature_check: union regions are not supported"); },
          [](const OffsetRegion&) -> double {
            throw ValidationError("quadrature_check: offset regions are not supported");
          },
      },
      region.node());
}

}  // namespace

ObstacleProblem build_obstacle_discrete(const ScalarField& sigma_n) {
  for (double v : sigma_n.values()) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("build_obstacle_discrete: σ_n must be finite and >= 0");
  }
  ScalarField gamma = minus_squared_norm(sigma_n.spec());
  const ScalarField potential = discrete_potential(sigma_n);
  for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] -= potential[i];
  return {std::move(gamma), ObstacleFlavor::Discrete, sigma_n, std::nullopt};
}

ObstacleProblem build_obstacle_continuum(const ContinuumDensity& sigma, const LatticeSpec& spec) {
  if (sigma.dim() != spec.dim()) throw ValidationError("build_obstacle_continuum: dimension mismatch");
  ScalarField gamma = minus_squared_norm(spec);
  const ScalarField potential = continuum_potential_field(sigma, spec);
  ScalarField source(spec);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    gamma[i] -= potential[i];
    source[i] = sigma.value(spec.point(i));
  }
  return {std::move(gamma), ObstacleFlavor::Continuum, std::move(source), sigma};
}

MajorantSolution least_majorant(const ObstacleProblem& problem, const MajorantOptions& options) {
  const LatticeSpec& spec = problem.spec();
  const ScalarField& gamma = problem.gamma;
  if (!(options.tol > 0.0)) throw ValidationError("least_majorant: tol must be positive");
  for (double v : gamma.values()) {
    if (!std::isfinite(v)) throw ValidationError("least_majorant: obstacle has non-finite values");
  }
  const Sweep sw = interior_sweep(spec);
  const double inv = 1.0 / static_cast<double>(sw.neighbors.size());

  // work with u = s - γ >= 0: u = max(0, mean(u) + h), h = mean(γ) - γ
  std::vector<double> h(spec.size(), 0.0);
  for (const auto& color : sw.sites) {
    for (std::size_t i : color) {
      double acc = 0.0;
      for (auto off : sw.neighbors) acc += gamma[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)];
      h[i] = acc * inv - gamma[i];
    }
  }
  std::vector<double> u(spec.size(), 0.0);
  if (options.warm_start) {
    if (!(options.warm_start->spec() == spec)) throw ValidationError("least_majorant: warm start lattice mismatch");
    for (const auto& color : sw.sites) {
      for (std::size_t i : color) u[i] = std::max(0.0, (*options.warm_start)[i] - gamma[i]);
    }
  }

  int longest = 0;
  for (int a = 0; a < spec.dim(); ++a) longest = std::max(longest, spec.extent()[a] - 1);
  const double omega =
      options.omega > 0.0 ? options.omega : 2.0 / (1.0 + std::sin(std::numbers::pi / std::max(longest, 2)));

  std::vector<double> history;
  long iter = 0;
  double residual = 0.0;
  bool converged = false;
  if (options.method == MajorantMethod::ProjectedSor) {
    while (iter < options.max_iters) {
      residual = 0.0;
      for (const auto& color : sw.sites) {
        for (std::size_t i : color) {
          double acc = 0.0;
          for (auto off : sw.neighbors) acc += u[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)];
          const double next = std::max(0.0, u[i] + omega * (acc * inv + h[i] - u[i]));
          residual = std::max(residual, std::abs(next - u[i]));
          u[i] = next;
        }
      }
      ++iter;
      history.push_back(residual);
      if (!std::isfinite(residual)) break;
      if (residual <= options.tol) {
        converged = true;
        break;
      }
    }
  } else {
    std::vector<double> next = u;
    std::vector<std::size_t> all;
    for (const auto& color : sw.sites) all.insert(all.end(), color.begin(), color.end());
    std::sort(all.begin(), all.end());
    while (iter < options.max_iters) {
      residual = 0.0;
#pragma omp parallel for schedule(static) reduction(max : residual)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(all.size()); ++k) {
        const std::size_t i = all[static_cast<std::size_t>(k)];
        double acc = 0.0;
        for (auto off : sw.neighbors) acc += u[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)];
        next[i] = std::max(0.0, acc * inv + h[i]);
        residual = std::max(residual, std::abs(next[i] - u[i]));
      }
      std::swap(u, next);
      ++iter;
      history.push_back(residual);
      if (!std::isfinite(residual)) break;
      if (residual <= options.tol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "least_majorant: no convergence after " << iter << " iterations (last max update " << residual << ")";
    throw ConvergenceError(os.str(), std::move(history));
  }

  MajorantSolution sol{ScalarField(spec), iter, residual, 100.0 * options.tol, DomainMask(spec)};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    sol.s[i] = gamma[i] + u[i];
    if (u[i] > sol.threshold) {
      sol.domain[i] = 1;
      if (options.check_box && sw.near_frame[i]) {
        throw BoxTooSmallError("noncoincidence set reaches the frame of " + spec.describe());
      }
    }
  }
  return sol;
}

ScalarField odometer_from_majorant(const ObstacleProblem& problem, const MajorantSolution& solution) {
  if (!(problem.spec() == solution.s.spec())) throw ValidationError("odometer_from_majorant: lattice mismatch");
  ScalarField u(problem.spec());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::max(0.0, solution.s[i] - problem.gamma[i]);
  return u;
}

DomainMask occupied_limit(const ContinuumDensity& sigma, const LatticeSpec& spec, double tol) {
  const ObstacleProblem problem = build_obstacle_continuum(sigma, spec);
  MajorantOptions options;
  options.tol = tol;
  const MajorantSolution sol = least_majorant(problem, options);
  DomainMask result = sol.domain;
  // Boundary sites the majorant fills at least halfway, ν = 1 + Δs ≥ 1/2.
  const ScalarField lap = discrete_laplacian(sol.s);
  for (std::size_t i = 0; i < result.size(); ++i) {
    if (result[i] || spec.on_frame(i)) continue;
    if (1.0 + lap[i] >= 0.5 || sigma.value(spec.point(spec.coord(i))) >= 1.0) result[i] = 1;
  }
  return result;
}

DomainMask smash_sum_continuum(const std::vector<ContinuumSet>& sets, const LatticeSpec& spec, double tol) {
  if (sets.empty()) return DomainMask(spec);
  DomainMask result = occupied_limit(ContinuumDensity::indicator_sum(spec.dim(), sets), spec, tol);
  for (const auto& s : sets) result = mask_union(result, s.rasterize(spec));
  return result;
}

DomainMask smash_sum_continuum(const ContinuumSet& a, const ContinuumSet& b, const LatticeSpec& spec, double tol) {
  return smash_sum_continuum(std::vector<ContinuumSet>{a, b}, spec, tol);
}

AssociativityReport associativity_check(const ContinuumSet& a, const ContinuumSet& b, const ContinuumSet& c,
                                        const LatticeSpec& spec, double tol) {
  AssociativityReport r{smash_sum_continuum(ContinuumSet::cells(smash_sum_continuum(a, b, spec, tol)), c, spec, tol),
                        smash_sum_continuum(a, ContinuumSet::cells(smash_sum_continuum(b, c, spec, tol)), spec, tol),
                        smash_sum_continuum(std::vector<ContinuumSet>{a, b, c}, spec, tol)};
  r.left_right = symmetric_difference_volume(r.left, r.right);
  r.left_direct = symmetric_difference_volume(r.left, r.direct);
  r.right_direct = symmetric_difference_volume(r.right, r.direct);
  r.total_volume = a.volume() + b.volume() + c.volume();
  return r;
}

TestFunction TestFunction::constant_function(double c) { return {Kind::Constant, 1.0, c, {}}; }

TestFunction TestFunction::affine(double c, const Point& gradient) { return {Kind::Affine, 1.0, c, gradient}; }

TestFunction TestFunction::green(const Point& pole) { return {Kind::Green, 1.0, 0.0, pole}; }

TestFunction TestFunction::negative_quadratic(const Point& center) {
  return {Kind::NegativeQuadratic, 1.0, 0.0, center};
}

TestFunction TestFunction::negated() const {
  TestFunction t = *this;
  t.scale = -t.scale;
  return t;
}

double TestFunction::operator()(const Point& x, int dim) const {
  switch (kind) {
    case Kind::Constant: return scale * constant;
    case Kind::Affine: {
      double v = constant;
      for (int i = 0; i < dim; ++i) v += vector[i] * x[i];
      return scale * v;
    }
    case Kind::Green: return scale * continuum_kernel(vector, x, dim);
    case Kind::NegativeQuadratic: {
      double r2 = 0.0;
      for (int i = 0; i < dim; ++i) r2 += (x[i] - vector[i]) * (x[i] - vector[i]);
      return -scale * r2;
    }
  }
  return 0.0;
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  if (scale < 0) os << "-";
  switch (kind) {
    case Kind::Constant: os << "const(" << constant << ")"; break;
    case Kind::Affine: os << "affine(" << constant << "; " << vector[0] << ", " << vector[1] << ")"; break;
    case Kind::Green: os << "g(" << vector[0] << ", " << vector[1] << "; .)"; break;
    case Kind::NegativeQuadratic: os << "-|x - (" << vector[0] << ", " << vector[1] << ")|^2"; break;
  }
  return os.str();
}

QuadratureResult quadrature_check(const DomainMask& d, const ContinuumDensity& sigma, const TestFunction& h) {
  const int dim = sigma.dim();
  if (d.spec().dim() != dim) throw ValidationError("quadrature_check: dimension mismatch");
  QuadratureResult r;
  r.harmonic = h.harmonic();
  r.lhs = h.scale * region_integral(ContinuumSet::cells(d), h, dim);
  for (const auto& t : sigma.terms()) r.rhs += t.weight * h.scale * region_integral(t.region, h, dim);
  for (const auto& p : sigma.point_masses()) r.rhs += p.mass * h(p.center, dim);
  r.margin = r.rhs - r.lhs;
  return r;
}

}  // namespace agg
