#include "agg/green.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace agg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

double distance(const Point& x, const Point& y, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

// Antiderivative of log(X² + Y²) in both variables.
double log_antiderivative(double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 == 0.0) return 0.0;
  double f = x * y * (std::log(r2) - 3.0);
  if (x != 0.0) f += x * x * std::atan(y / x);
  if (y != 0.0) f += y * y * std::atan(x / y);
  return f;
}

double box_potential_2d(const Point& lo, const Point& hi, const Point& x) {
  const double w0 = hi[0] - lo[0];
  const double w1 = hi[1] - lo[1];
  const double cx = x[0] - 0.5 * (lo[0] + hi[0]);
  const double cy = x[1] - 0.5 * (lo[1] + hi[1]);
  const double r2 = cx * cx + cy * cy;
  const double size = std::max(w0, w1);
  if (r2 > 256.0 * size * size) {
    // multipole: monopole, quadrupole and hexadecapole of the rectangle
    const double area = w0 * w1;
    const double m20 = area * (w0 * w0 - w1 * w1) / 12.0;
    const double m40 = area * (std::pow(w0, 4) / 80.0 - w0 * w0 * w1 * w1 / 24.0 + std::pow(w1, 4) / 80.0);
    const double phi = std::atan2(cy, cx);
    const double log_term = 0.5 * area * std::log(r2) - m20 * std::cos(2 * phi) / (2.0 * r2) -
                            m40 * std::cos(4 * phi) / (4.0 * r2 * r2);
    return -kTwoOverPi * log_term;
  }
  const double a1 = x[0] - hi[0];
  const double a2 = x[0] - lo[0];
  const double b1 = x[1] - hi[1];
  const double b2 = x[1] - lo[1];
  const double integral = log_antiderivative(a2, b2) - log_antiderivative(a1, b2) - log_antiderivative(a2, b1) +
                          log_antiderivative(a1, b1);
  // ∫ log|x-y| dy = integral / 2
  return -kTwoOverPi * 0.5 * integral;
}

// ∫ over [lo, hi] of a_d |x - y|^{2-d} by iterated adaptive Gauss–Kronrod, split at x.
double box_potential_cubature(const Point& lo, const Point& hi, const Point& x, int dim) {
  using boost::math::quadrature::gauss_kronrod;
  const double ad = kernel_constant(dim);
  Point y{};
  std::function<double(int, double)> integrate_axis = [&](int axis, double partial_r2) -> double {
    auto integrand = [&](double t) {
      const double dt = x[axis] - t;
      const double r2 = partial_r2 + dt * dt;
      if (axis + 1 == dim) return r2 > 0.0 ? std::pow(r2, 0.5 * (2 - dim)) : 0.0;
      y[axis] = t;
      return integrate_axis(axis + 1, r2);
    };
    double total = 0.0;
    double a = lo[axis];
    double b = hi[axis];
    auto piece = [&](double from, double to) {
      if (to > from) total += gauss_kronrod<double, 15>::integrate(integrand, from, to, 12, 1e-11);
    };
    if (x[axis] > a && x[axis] < b) {
      piece(a, x[axis]);
      piece(x[axis], b);
    } else {
      piece(a, b);
    }
    return total;
  };
  return ad * integrate_axis(0, 0.0);
}

}  // namespace

double kernel_constant(int dim) {
  if (dim < 3) throw WrongDimensionError("a_d is defined for d >= 3");
  return 2.0 / ((dim - 2) * unit_ball_volume(dim));
}

double continuum_kernel(const Point& x, const Point& y, int dim) {
  const double r = distance(x, y, dim);
  if (r == 0.0) throw SingularityError("continuum kernel evaluated at its pole");
  if (dim == 2) return -kTwoOverPi * std::log(r);
  return kernel_constant(dim) * std::pow(r, 2 - dim);
}

double ball_potential(const Point& center, double radius, const Point& x, int dim) {
  if (!(radius > 0.0)) throw ValidationError("ball_potential: radius must be positive");
  const double r = distance(x, center, dim);
  const double r2 = radius * radius;
  if (dim == 2) {
    if (r < radius) return r2 * (1.0 - 2.0 * std::log(radius)) - r * r;
    return -2.0 * r2 * std::log(r);
  }
  if (r < radius) return dim * r2 / (dim - 2) - r * r;
  return 2.0 * r2 / (dim - 2) * std::pow(radius / r, dim - 2);
}

double box_potential(const Point& lo, const Point& hi, const Point& x, int dim) {
  if (dim == 2) return box_potential_2d(lo, hi, x);
  return box_potential_cubature(lo, hi, x, dim);
}

double continuum_potential(const ContinuumDensity& sigma, const Point& x) {
  const int d = sigma.dim();
  double total = 0.0;
  for (const auto& t : sigma.terms()) {
    const double g = std::visit(
        overloaded{
            [&](const BallRegion& b) { return b.radius > 0.0 ? ball_potential(b.center, b.radius, x, d) : 0.0; },
            [&](const BoxRegion& b) { return box_potential(b.lo, b.hi, x, d); },
            [&](const CellRegion& c) {
              const LatticeSpec& cs = c.mask.spec();
              const double h = 0.5 * cs.spacing();
              double acc = 0.0;
              for (std::size_t i = 0; i < c.mask.size(); ++i) {
                if (!c.mask[i]) continue;
                Point lo = cs.point(i);
                Point hi = lo;
                for (int k = 0; k < d; ++k) {
                  lo[k] -= h;
                  hi[k] += h;
                }
                acc += box_potential(lo, hi, x, d);
              }
              return acc;
            },
            [](const UnionRegion&) { return 0.0; },
            [](const OffsetRegion&) { return 0.0; },
        },
        t.region.node());
    total += t.weight * g;
  }
  for (const auto& p : sigma.point_masses()) total += p.mass * continuum_kernel(x, p.center, d);
  return total;
}

namespace {

// Potential of the cell [-δ/2, δ/2)^d evaluated at δ·offset, on the orthant of offsets.
class CellKernel {
 public:
  CellKernel(int dim, double spacing, const Coord& max_offset) : dim_(dim), max_(max_offset) {
    std::size_t n = 1;
    for (int i = dim - 1; i >= 0; --i) {
      strides_[i] = n;
      n *= static_cast<std::size_t>(max_[i] + 1);
    }
    values_.resize(n);
    const double h = 0.5 * spacing;
    Point lo{};
    Point hi{};
    for (int i = 0; i < dim; ++i) {
      lo[i] = -h;
      hi[i] = h;
    }
    for (std::size_t idx = 0; idx < n; ++idx) {
      Coord o{};
      std::size_t rem = idx;
      int linf = 0;
      for (int i = 0; i < dim; ++i) {
        o[i] = static_cast<int>(rem / strides_[i]);
        rem %= strides_[i];
        linf = std::max(linf, o[i]);
      }
      Point x{};
      for (int i = 0; i < dim; ++i) x[i] = spacing * o[i];
      if (dim == 2 || linf <= 3) {
        values_[idx] = box_potential(lo, hi, x, dim);
      } else {
        values_[idx] = gauss_cell(x, spacing);
      }
    }
  }

  double operator()(const Coord& offset) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim_; ++i) idx += static_cast<std::size_t>(std::abs(offset[i])) * strides_[i];
    return values_[idx];
  }

 private:
  // 4-point tensor Gauss rule over one cell away from the pole.
  double gauss_cell(const Point& x, double spacing) const {
    static constexpr std::array<double, 4> nodes = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                                    0.8611363115940526};
    static constexpr std::array<double, 4> weights = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                                      0.3478548451374538};
    const double h = 0.5 * spacing;
    int total = 1;
    for (int i = 0; i < dim_; ++i) total *= 4;
    double acc = 0.0;
    for (int s = 0; s < total; ++s) {
      int rem = s;
      double w = 1.0;
      Point y{};
      for (int i = 0; i < dim_; ++i) {
        const int j = rem % 4;
        rem /= 4;
        y[i] = h * nodes[j];
        w *= h * weights[j];
      }
      acc += w * continuum_kernel(x, y, dim_);
    }
    return acc;
  }

  int dim_;
  Coord max_;
  std::array<std::size_t, kMaxDim> strides_{};
  std::vector<double> values_;
};

}  // namespace

ScalarField continuum_potential_field(const ContinuumDensity& sigma, const LatticeSpec& spec) {
  if (sigma.dim() != spec.dim()) throw ValidationError("continuum_potential_field: dimension mismatch");
  const int d = spec.dim();
  ScalarField out(spec);
  for (const auto& t : sigma.terms()) {
    const auto* cells = std::get_if<CellRegion>(&t.region.node());
    if (cells == nullptr || cells->mask.spec().spacing() != spec.spacing()) {
      ContinuumDensity single(d);
      single.add(t.weight, t.region);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += continuum_potential(single, spec.point(i));
      continue;
    }
    const LatticeSpec& cs = cells->mask.spec();
    Coord max_offset{};
    const Coord hi = spec.hi();
    const Coord chi = cs.hi();
    for (int k = 0; k < d; ++k) {
      max_offset[k] = std::max({std::abs(hi[k] - cs.lo()[k]), std::abs(chi[k] - spec.lo()[k])});
    }
    const CellKernel kernel(d, spec.spacing(), max_offset);
    const std::vector<Coord> sources = sites_of(cells->mask);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Coord x = spec.coord(i);
      double acc = 0.0;
      for (const Coord& y : sources) {
        Coord o{};
        for (int k = 0; k < d; ++k) o[k] = x[k] - y[k];
        acc += kernel(o);
      }
      out[i] += t.weight * acc;
    }
  }
  for (const auto& p : sigma.point_masses()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.mass * continuum_kernel(spec.point(i), p.center, d);
  }
  return out;
}

double potential_kernel_2d(int x, int y) { return kernel_table(2)(make_coord({x, y})); }

double discrete_green(const Coord& offset, int dim, double spacing) {
  if (dim == 2) throw WrongDimensionError("discrete_green needs d >= 3; use potential_kernel_2d in d = 2");
  return std::pow(spacing, 2 - dim) * kernel_table(dim)(offset);
}

double lattice_kernel(const LatticeSpec& spec, const Coord& offset) {
  const double delta = spec.spacing();
  if (spec.dim() == 2) return -kernel_table(2)(offset) + kTwoOverPi * std::log(delta);
  return std::pow(delta, 2 - spec.dim()) * kernel_table(spec.dim())(offset);
}

ScalarField discrete_potential(const ScalarField& sigma_n) {
  return discrete_potential(sigma_n, kernel_table(sigma_n.spec().dim()));
}

ScalarField discrete_potential(const ScalarField& sigma_n, const KernelTable& table) {
  const LatticeSpec& spec = sigma_n.spec();
  const int d = spec.dim();
  if (table.dim() != d) throw WrongDimensionError("kernel table dimension does not match the field");
  const double delta = spec.spacing();

  // g_n on the orthant of offsets spanned by the box
  std::array<std::size_t, kMaxDim> strides{};
  std::size_t n = 1;
  for (int i = d - 1; i >= 0; --i) {
    strides[i] = n;
    n *= static_cast<std::size_t>(spec.extent()[i]);
  }
  std::vector<double> kernel(n);
  const double shift = d == 2 ? kTwoOverPi * std::log(delta) : 0.0;
  const double scale = d == 2 ? -1.0 : std::pow(delta, 2 - d);
  for (std::size_t idx = 0; idx < n; ++idx) {
    Coord o{};
    std::size_t rem = idx;
    for (int i = 0; i < d; ++i) {
      o[i] = static_cast<int>(rem / strides[i]);
      rem %= strides[i];
    }
    kernel[idx] = scale * table(o) + shift;
  }

  std::vector<std::pair<Coord, double>> support;
  for (std::size_t i = 0; i < sigma_n.size(); ++i) {
    if (sigma_n[i] != 0.0) support.emplace_back(spec.coord(i), sigma_n[i]);
  }
  const double cell = std::pow(delta, d);
  ScalarField out(spec);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
    const Coord x = spec.coord(static_cast<std::size_t>(i));
    double acc = 0.0;
    for (const auto& [y, w] : support) {
      std::size_t idx = 0;
      for (int k = 0; k < d; ++k) idx += static_cast<std::size_t>(std::abs(x[k] - y[k])) * strides[k];
      acc += kernel[idx] * w;
    }
    out[static_cast<std::size_t>(i)] = cell * acc;
  }
  return out;
}

ScalarField smooth(const ScalarField& f, int steps) {
  if (steps < 0) throw ValidationError("smooth: step count must be >= 0");
  const LatticeSpec& spec = f.spec();
  const int d = spec.dim();
  const double w = 1.0 / (4.0 * d);
  const Coord hi = spec.hi();
  ScalarField cur = f;
  ScalarField next(spec);
  for (int s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Coord c = spec.coord(i);
      double acc = 0.0;
      for (int a = 0; a < d; ++a) {
        const auto st = spec.stride(a);
        if (c[a] < hi[a]) acc += cur[i + st];
        if (c[a] > spec.lo()[a]) acc += cur[i - st];
      }
      next[i] = 0.5 * cur[i] + w * acc;
    }
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace agg
