#include "agg/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace agg {

Coord make_coord(std::initializer_list<int> values) {
  if (values.size() > kMaxDim) throw ValidationError("too many coordinates");
  Coord c{};
  std::copy(values.begin(), values.end(), c.begin());
  return c;
}

Point make_point(std::initializer_list<double> values) {
  if (values.size() > kMaxDim) throw ValidationError("too many coordinates");
  Point p{};
  std::copy(values.begin(), values.end(), p.begin());
  return p;
}

double squared_norm(const Point& p, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += p[i] * p[i];
  return s;
}

double norm(const Point& p, int dim) { return std::sqrt(squared_norm(p, dim)); }

LatticeSpec::LatticeSpec(int dim, double spacing, const Coord& lo, const Coord& extent)
    : dim_(dim), spacing_(spacing), lo_(lo), extent_(extent) {
  if (dim < 2 || dim > kMaxDim) {
    throw ValidationError("lattice dimension must be in [2, " + std::to_string(kMaxDim) + "], got " +
                          std::to_string(dim));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("lattice spacing must be positive");
  for (int i = dim; i < kMaxDim; ++i) {
    lo_[i] = 0;
    extent_[i] = 1;
  }
  size_ = 1;
  for (int i = 0; i < dim; ++i) {
    if (extent_[i] < 3) throw ValidationError("every box extent must be at least 3 sites");
    size_ *= static_cast<std::size_t>(extent_[i]);
  }
  std::ptrdiff_t s = 1;
  for (int i = dim - 1; i >= 0; --i) {
    strides_[i] = s;
    s *= extent_[i];
  }
  for (int i = dim; i < kMaxDim; ++i) strides_[i] = 0;
}

LatticeSpec LatticeSpec::centered(int dim, double spacing, int half_width) {
  Coord lo{};
  Coord extent{};
  for (int i = 0; i < dim; ++i) {
    lo[i] = -half_width;
    extent[i] = 2 * half_width + 1;
  }
  return LatticeSpec(dim, spacing, lo, extent);
}

LatticeSpec LatticeSpec::covering(int dim, double spacing, const Point& center, double radius) {
  Point lo{};
  Point hi{};
  for (int i = 0; i < dim; ++i) {
    lo[i] = center[i] - radius;
    hi[i] = center[i] + radius;
  }
  return covering_box(dim, spacing, lo, hi);
}

LatticeSpec LatticeSpec::covering_box(int dim, double spacing, const Point& lo, const Point& hi) {
  Coord clo{};
  Coord extent{};
  for (int i = 0; i < dim; ++i) {
    const int a = static_cast<int>(std::floor(lo[i] / spacing));
    const int b = static_cast<int>(std::ceil(hi[i] / spacing));
    clo[i] = a;
    extent[i] = std::max(3, b - a + 1);
  }
  return LatticeSpec(dim, spacing, clo, extent);
}

Coord LatticeSpec::hi() const noexcept {
  Coord h{};
  for (int i = 0; i < dim_; ++i) h[i] = lo_[i] + extent_[i] - 1;
  return h;
}

Point LatticeSpec::origin_offset() const noexcept { return point(lo_); }

bool LatticeSpec::contains(const Coord& c) const noexcept {
  for (int i = 0; i < dim_; ++i) {
    if (c[i] < lo_[i] || c[i] >= lo_[i] + extent_[i]) return false;
  }
  return true;
}

std::size_t LatticeSpec::index(const Coord& c) const noexcept {
  std::ptrdiff_t idx = 0;
  for (int i = 0; i < dim_; ++i) idx += (c[i] - lo_[i]) * strides_[i];
  return static_cast<std::size_t>(idx);
}

std::size_t LatticeSpec::checked_index(const Coord& c) const {
  if (!contains(c)) {
    std::ostringstream os;
    os << "site (";
    for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c[i];
    os << ") outside " << describe();
    throw DomainError(os.str());
  }
  return index(c);
}

Coord LatticeSpec::coord(std::size_t index) const noexcept {
  Coord c{};
  auto rem = static_cast<std::ptrdiff_t>(index);
  for (int i = 0; i < dim_; ++i) {
    c[i] = static_cast<int>(rem / strides_[i]) + lo_[i];
    rem %= strides_[i];
  }
  return c;
}

Point LatticeSpec::point(const Coord& c) const noexcept {
  Point p{};
  for (int i = 0; i < dim_; ++i) p[i] = spacing_ * c[i];
  return p;
}

bool LatticeSpec::on_frame(const Coord& c) const noexcept {
  for (int i = 0; i < dim_; ++i) {
    if (c[i] == lo_[i] || c[i] == lo_[i] + extent_[i] - 1) return true;
  }
  return false;
}

std::vector<std::ptrdiff_t> LatticeSpec::neighbor_offsets() const {
  std::vector<std::ptrdiff_t> out;
  out.reserve(2 * dim_);
  for (int i = 0; i < dim_; ++i) out.push_back(strides_[i]);
  for (int i = 0; i < dim_; ++i) out.push_back(-strides_[i]);
  return out;
}

std::string LatticeSpec::describe() const {
  std::ostringstream os;
  os << "box d=" << dim_ << " delta=" << spacing_ << " lo=(";
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << lo_[i];
  os << ") extent=(";
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << extent_[i];
  os << ")";
  return os.str();
}

std::pair<Coord, Coord> site_range(const LatticeSpec& spec, const Point& lo, const Point& hi) {
  Coord a{};
  Coord b{};
  for (int i = 0; i < spec.dim(); ++i) {
    a[i] = static_cast<int>(std::floor(lo[i] / spec.spacing())) - 1;
    b[i] = static_cast<int>(std::ceil(hi[i] / spec.spacing())) + 1;
  }
  return {a, b};
}

std::size_t count(const DomainMask& mask) {
  std::size_t n = 0;
  for (auto b : mask.values()) n += b ? 1 : 0;
  return n;
}

double sum(const ScalarField& field) {
  double s = 0.0;
  for (double v : field.values()) s += v;
  return s;
}

double max_abs(const ScalarField& field) {
  double m = 0.0;
  for (double v : field.values()) m = std::max(m, std::abs(v));
  return m;
}

std::vector<Coord> sites_of(const DomainMask& mask) {
  std::vector<Coord> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(mask.spec().coord(i));
  }
  return out;
}

namespace {

void require_same_spec(const LatticeSpec& a, const LatticeSpec& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string(what) + ": masks live on different lattices");
}

}  // namespace

DomainMask mask_union(const DomainMask& a, const DomainMask& b) {
  require_same_spec(a.spec(), b.spec(), "mask_union");
  DomainMask out(a.spec());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

DomainMask mask_intersection(const DomainMask& a, const DomainMask& b) {
  require_same_spec(a.spec(), b.spec(), "mask_intersection");
  DomainMask out(a.spec());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

DomainMask remap(const DomainMask& mask, const LatticeSpec& target) {
  if (mask.spec().dim() != target.dim() || mask.spec().spacing() != target.spacing()) {
    throw ValidationError("remap: incompatible lattices");
  }
  DomainMask out(target);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    out[target.checked_index(mask.spec().coord(i))] = 1;
  }
  return out;
}

ScalarField remap(const ScalarField& field, const LatticeSpec& target) {
  if (field.spec().dim() != target.dim() || field.spec().spacing() != target.spacing()) {
    throw ValidationError("remap: incompatible lattices");
  }
  ScalarField out(target);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == 0.0) continue;
    out[target.checked_index(field.spec().coord(i))] = field[i];
  }
  return out;
}

Coord site_of_point(const LatticeSpec& spec, const Point& x) {
  Coord c{};
  for (int i = 0; i < spec.dim(); ++i) {
    if (!std::isfinite(x[i])) throw DomainError("site_of_point: non-finite coordinate");
    c[i] = static_cast<int>(std::floor(x[i] / spec.spacing() + 0.5));
  }
  if (!spec.contains(c)) throw DomainError("site_of_point: point outside " + spec.describe());
  return c;
}

ScalarField discrete_laplacian(const ScalarField& f) {
  const LatticeSpec& spec = f.spec();
  const int d = spec.dim();
  const double scale = 1.0 / (spec.spacing() * spec.spacing());
  const double w = 1.0 / (2.0 * d);
  ScalarField out(spec);
  const Coord hi = spec.hi();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Coord c = spec.coord(i);
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const auto s = spec.stride(a);
      if (c[a] < hi[a]) acc += f[i + s];
      if (c[a] > spec.lo()[a]) acc += f[i - s];
    }
    out[i] = scale * (w * acc - f[i]);
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb–Huttenlocher lower envelope of parabolas, in place on one line.
void edt_line(std::vector<double>& f, std::vector<double>& out, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    auto intersect = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };
    double s = intersect(v[k]);
    while (s <= z[k]) {  // z[0] = -inf stops this at k = 0
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    out[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

std::vector<std::int64_t> squared_distance_map(const DomainMask& target, bool outside_counts) {
  const LatticeSpec& spec = target.spec();
  const int d = spec.dim();
  std::vector<double> dist(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) dist[i] = target[i] ? 0.0 : kInf;

  for (int axis = 0; axis < d; ++axis) {
    const int n = spec.extent()[axis];
    const auto stride = spec.stride(axis);
    std::vector<double> line(n), out(n), z(n + 1);
    std::vector<int> v(n);
    for (std::size_t base = 0; base < dist.size(); ++base) {
      // visit each line once, from its first site
      const Coord c = spec.coord(base);
      if (c[axis] != spec.lo()[axis]) continue;
      for (int q = 0; q < n; ++q) line[q] = dist[base + q * stride];
      edt_line(line, out, v, z);
      for (int q = 0; q < n; ++q) dist[base + q * stride] = out[q];
    }
  }

  std::vector<std::int64_t> result(target.size());
  const Coord hi = spec.hi();
  for (std::size_t i = 0; i < target.size(); ++i) {
    double best = dist[i];
    if (outside_counts) {
      const Coord c = spec.coord(i);
      for (int a = 0; a < d; ++a) {
        const double m = std::min(c[a] - spec.lo()[a] + 1, hi[a] - c[a] + 1);
        best = std::min(best, m * m);
      }
    }
    result[i] = best == kInf ? -1 : static_cast<std::int64_t>(std::llround(best));
  }
  return result;
}

namespace {

// Largest integer squared lattice distance that still lies within radius ε.
std::int64_t radius_bound(double epsilon, double spacing) {
  const double r = epsilon / spacing;
  const double r2 = r * r;
  auto b = static_cast<std::int64_t>(std::floor(r2));
  // guard against r2 landing a hair below an integer
  if (std::abs(r2 - std::round(r2)) < 1e-9 * std::max(1.0, r2)) b = static_cast<std::int64_t>(std::llround(r2));
  return b;
}

DomainMask complement(const DomainMask& mask) {
  DomainMask out(mask.spec());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 1;
  return out;
}

double directed_hausdorff(const DomainMask& from, const std::vector<std::int64_t>& dist_to) {
  std::int64_t worst = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!from[i]) continue;
    if (dist_to[i] < 0) return kInf;
    worst = std::max(worst, dist_to[i]);
  }
  return std::sqrt(static_cast<double>(worst)) * from.spec().spacing();
}

}  // namespace

DomainMask inner_neighborhood(const DomainMask& mask, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("inner_neighborhood: epsilon must be positive");
  const auto bound = radius_bound(epsilon, mask.spec().spacing());
  const auto dist = squared_distance_map(complement(mask), true);
  DomainMask out(mask.spec());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    // every site within ε is set ⇔ the nearest unset site is farther than ε
    out[i] = (mask[i] && (dist[i] < 0 || dist[i] > bound)) ? 1 : 0;
  }
  return out;
}

DomainMask outer_neighborhood(const DomainMask& mask, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("outer_neighborhood: epsilon must be positive");
  const auto bound = radius_bound(epsilon, mask.spec().spacing());
  const auto dist = squared_distance_map(mask, false);
  DomainMask out(mask.spec());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = (dist[i] >= 0 && dist[i] <= bound) ? 1 : 0;
  return out;
}

double symmetric_difference_volume(const DomainMask& a, const DomainMask& b) {
  require_same_spec(a.spec(), b.spec(), "symmetric_difference_volume");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (bool(a[i]) != bool(b[i])) ? 1 : 0;
  return static_cast<double>(n) * std::pow(a.spec().spacing(), a.spec().dim());
}

double hausdorff_distance(const DomainMask& a, const DomainMask& b) {
  require_same_spec(a.spec(), b.spec(), "hausdorff_distance");
  const std::size_t na = count(a);
  const std::size_t nb = count(b);
  if (na == 0 && nb == 0) return 0.0;
  if (na == 0 || nb == 0) return kInf;
  const double ab = directed_hausdorff(a, squared_distance_map(b, false));
  const double ba = directed_hausdorff(b, squared_distance_map(a, false));
  return std::max(ab, ba);
}

double inner_outer_hausdorff(const DomainMask& a, const DomainMask& b) {
  return std::max(hausdorff_distance(a, b), hausdorff_distance(complement(a), complement(b)));
}

std::string to_string(ShapeVerdict verdict) {
  switch (verdict) {
    case ShapeVerdict::Pass:
      return "pass";
    case ShapeVerdict::FailInner:
      return "fail-inner";
    case ShapeVerdict::FailOuter:
      return "fail-outer";
  }
  return "unknown";
}

ShapeCheck check_shape_convergence(const DomainMask& a, const DomainMask& d, double epsilon) {
  require_same_spec(a.spec(), d.spec(), "check_shape_convergence");
  const DomainMask inner = inner_neighborhood(d, epsilon);
  const DomainMask outer = outer_neighborhood(d, epsilon);
  ShapeCheck check;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (inner[i] && !a[i]) check.missing_inner.push_back(a.spec().coord(i));
    if (a[i] && !outer[i]) check.outside_outer.push_back(a.spec().coord(i));
  }
  if (!check.missing_inner.empty()) {
    check.verdict = ShapeVerdict::FailInner;
  } else if (!check.outside_outer.empty()) {
    check.verdict = ShapeVerdict::FailOuter;
  }
  return check;
}

}  // namespace agg
