#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include "json.hpp"

#include "agg/green.hpp"

namespace agg {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;
constexpr char kMagic[4] = {'G', 'K', 'T', '1'};

// a(m, n) on Z² from the Fourier integral with the inner angle done in closed form:
// a = (2/π)∫_0^π [1 - cos(mθ) e^{-nβ}] / sinh β dθ,  cosh β = 2 - cos θ.
double integrand(double theta, int m, int n) {
  const double s = std::sqrt(2.0) * std::sin(0.5 * theta) * std::sqrt(3.0 - std::cos(theta));
  if (s == 0.0) return static_cast<double>(n);
  const double half = std::sin(0.5 * m * theta);
  return (2.0 * half * half - std::cos(m * theta) * std::expm1(-n * std::asinh(s))) / s;
}

struct KernelValue {
  double value;
  double change;
};

KernelValue potential_kernel_integral(int m, int n) {
  using boost::math::quadrature::gauss;
  auto f = [m, n](double t) { return integrand(t, m, n); };
  auto composite = [&](int panels) {
    const double h = std::numbers::pi / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) total += gauss<double, 30>::integrate(f, p * h, (p + 1) * h);
    return total;
  };
  double previous = composite(1);
  for (int panels = 2; panels <= 4096; panels *= 2) {
    const double current = composite(panels);
    const double change = std::abs(current - previous);
    if (change <= 1e-13 * std::max(1.0, std::abs(current))) return {kTwoOverPi * current, kTwoOverPi * change};
    previous = current;
  }
  throw ConvergenceError("potential kernel quadrature did not stabilize at offset (" + std::to_string(m) + ", " +
                             std::to_string(n) + ")",
                         {});
}

std::size_t power(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

struct OrthantGrid {
  int dim;
  int side;  // points per axis
  std::array<std::size_t, kMaxDim> strides{};

  OrthantGrid(int d, int n) : dim(d), side(n) {
    std::size_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
      strides[i] = s;
      s *= static_cast<std::size_t>(n);
    }
  }
  std::size_t size() const { return power(static_cast<std::size_t>(side), dim); }
  Coord coord(std::size_t idx) const {
    Coord c{};
    for (int i = 0; i < dim; ++i) {
      c[i] = static_cast<int>(idx / strides[i]);
      idx %= strides[i];
    }
    return c;
  }
  std::size_t index(const Coord& c) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim; ++i) idx += static_cast<std::size_t>(c[i]) * strides[i];
    return idx;
  }
};

double coulomb(const Coord& c, int dim) {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i) r2 += static_cast<double>(c[i]) * c[i];
  return kernel_constant(dim) * std::pow(r2, 0.5 * (2 - dim));
}

// Average over all coordinate permutations.
std::vector<double> symmetrize(const std::vector<double>& g, const OrthantGrid& grid) {
  std::vector<double> out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    Coord c = grid.coord(idx);
    std::sort(c.begin(), c.begin() + grid.dim);
    double acc = 0.0;
    int count = 0;
    do {
      acc += g[grid.index(c)];
      ++count;
    } while (std::next_permutation(c.begin(), c.begin() + grid.dim));
    out[idx] = acc / count;
  }
  return out;
}

// Residual of g = mean of neighbors + 1_{x=0} on the orthant with reflection at 0.
double poisson_residual(const std::vector<double>& g, const OrthantGrid& grid, int limit,
                        const std::function<double(const Coord&)>& outside) {
  const int d = grid.dim;
  double worst = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Coord c = grid.coord(idx);
    if (*std::max_element(c.begin(), c.begin() + d) > limit) continue;
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      Coord up = c;
      ++up[a];
      acc += up[a] < grid.side ? g[grid.index(up)] : outside(up);
      Coord down = c;
      down[a] = std::abs(c[a] - 1);
      acc += g[grid.index(down)];
    }
    double origin = 1.0;
    for (int a = 0; a < d; ++a) origin = c[a] == 0 ? origin : 0.0;
    worst = std::max(worst, std::abs(acc / (2 * d) + origin - g[idx]));
  }
  return worst;
}

std::vector<double> solve_green_orthant(int dim, int radius, double& residual) {
  const int pad = radius + 32;
  const OrthantGrid grid(dim, pad + 1);
  const std::size_t n = grid.size();
  auto outside = [dim](const Coord& c) { return coulomb(c, dim); };

  std::vector<double> g(n);
  std::vector<std::uint8_t> color(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Coord c = grid.coord(idx);
    int parity = 0;
    bool origin = true;
    for (int a = 0; a < dim; ++a) {
      parity += c[a];
      origin = origin && c[a] == 0;
    }
    color[idx] = static_cast<std::uint8_t>(parity & 1);
    g[idx] = origin ? 1.5 : coulomb(c, dim);
  }

  const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi / (2.0 * (pad + 1))));
  const double inv = 1.0 / (2 * dim);
  std::vector<double> history;
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double worst = 0.0;
    for (std::uint8_t pass = 0; pass < 2; ++pass) {
#pragma omp parallel for schedule(static) reduction(max : worst)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (color[idx] != pass) continue;
        const Coord c = grid.coord(idx);
        double acc = 0.0;
        bool origin = true;
        for (int a = 0; a < dim; ++a) {
          const std::size_t st = grid.strides[a];
          if (c[a] == pad) {
            Coord up = c;
            ++up[a];
            acc += outside(up);
          } else {
            acc += g[idx + st];
          }
          acc += c[a] == 0 ? g[idx + st] : g[idx - st];
          origin = origin && c[a] == 0;
        }
        const double target = acc * inv + (origin ? 1.0 : 0.0);
        const double update = omega * (target - g[idx]);
        g[idx] += update;
        worst = std::max(worst, std::abs(update));
      }
    }
    history.push_back(worst);
    if (worst <= 1e-13) {
      g = symmetrize(g, grid);
      residual = poisson_residual(g, grid, radius, outside);
      // restrict to the requested radius
      const OrthantGrid table(dim, radius + 1);
      std::vector<double> out(table.size());
      for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = g[grid.index(table.coord(idx))];
      return out;
    }
  }
  throw ConvergenceError("Green's function solve did not converge", history);
}

template <typename T>
void write_le(std::ostream& os, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    os.write(bytes.data(), sizeof(T));
  } else {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <typename T>
T read_le(std::istream& is) {
  std::array<char, sizeof(T)> bytes{};
  is.read(bytes.data(), sizeof(T));
  if (!is) throw ValidationError("kernel table file is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("AGGLAB_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
    return std::filesystem::path(home) / ".cache" / "agglab";
  }
  return std::filesystem::temp_directory_path() / "agglab";
}

}  // namespace

KernelTable::KernelTable(int dim, int radius, std::vector<double> values, KernelTableInfo info)
    : dim_(dim), radius_(radius), values_(std::move(values)), info_(info) {}

KernelTable KernelTable::build(int dim, int radius) {
  if (dim < 2 || dim > kMaxDim) throw WrongDimensionError("kernel tables exist for 2 <= d <= 4");
  if (radius < 8) throw ValidationError("kernel table radius must be at least 8");
  KernelTableInfo info;
  std::vector<double> values;
  if (dim == 2) {
    const int side = radius + 1;
    values.assign(static_cast<std::size_t>(side) * side, 0.0);
    std::vector<double> change(values.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m <= radius; ++m) {
      for (int n = m; n <= radius; ++n) {
        const KernelValue v = potential_kernel_integral(m, n);
        values[static_cast<std::size_t>(m) * side + n] = v.value;
        values[static_cast<std::size_t>(n) * side + m] = v.value;
        change[static_cast<std::size_t>(m) * side + n] = v.change;
      }
    }
    values[0] = 0.0;
    info.construction_error = *std::max_element(change.begin(), change.end());
    info.tolerance = 1e-13;
  } else {
    values = solve_green_orthant(dim, radius, info.construction_error);
    info.tolerance = 1e-13;
  }
  KernelTable table(dim, radius, std::move(values), info);
  table.fit_far_field();
  return table;
}

void KernelTable::fit_far_field() {
  if (dim_ != 2) {
    // d >= 3: report the relative gap to a_d|x|^{2-d} along the table edge
    double worst = 0.0;
    const OrthantGrid grid(dim_, radius_ + 1);
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      const Coord c = grid.coord(idx);
      if (*std::max_element(c.begin(), c.begin() + dim_) != radius_) continue;
      const double ref = coulomb(c, dim_);
      worst = std::max(worst, std::abs(values_[idx] - ref) / ref);
    }
    info_.fit_residual = worst;
    return;
  }
  // least squares for a - (2/π)log r over 0.8R <= r <= R
  constexpr int kBasis = 4;
  auto basis = [](double r, double phi) {
    const double r2 = r * r;
    return std::array<double, kBasis>{1.0, std::cos(4 * phi) / r2, std::cos(4 * phi) / (r2 * r2),
                                      std::cos(8 * phi) / (r2 * r2)};
  };
  std::array<std::array<double, kBasis + 1>, kBasis> normal{};
  struct Sample {
    double target, r, phi;
  };
  std::vector<Sample> samples;
  for (int m = 0; m <= radius_; ++m) {
    for (int n = 0; n <= radius_; ++n) {
      const double r = std::hypot(m, n);
      if (r < 0.8 * radius_ || r > radius_) continue;
      const double phi = std::atan2(n, m);
      const double target = values_[static_cast<std::size_t>(m) * (radius_ + 1) + n] - kTwoOverPi * std::log(r);
      samples.push_back({target, r, phi});
      const auto b = basis(r, phi);
      for (int i = 0; i < kBasis; ++i) {
        for (int j = 0; j < kBasis; ++j) normal[i][j] += b[i] * b[j];
        normal[i][kBasis] += b[i] * target;
      }
    }
  }
  // Gaussian elimination with partial pivoting
  for (int col = 0; col < kBasis; ++col) {
    int pivot = col;
    for (int row = col + 1; row < kBasis; ++row) {
      if (std::abs(normal[row][col]) > std::abs(normal[pivot][col])) pivot = row;
    }
    std::swap(normal[col], normal[pivot]);
    for (int row = col + 1; row < kBasis; ++row) {
      const double f = normal[row][col] / normal[col][col];
      for (int k = col; k <= kBasis; ++k) normal[row][k] -= f * normal[col][k];
    }
  }
  std::array<double, kBasis> coef{};
  for (int row = kBasis - 1; row >= 0; --row) {
    double acc = normal[row][kBasis];
    for (int k = row + 1; k < kBasis; ++k) acc -= normal[row][k] * coef[k];
    coef[row] = acc / normal[row][row];
  }
  info_.kappa = coef[0];
  info_.correction = coef[1];
  info_.higher = {coef[2], coef[3]};
  double worst = 0.0;
  for (const auto& s : samples) {
    const auto b = basis(s.r, s.phi);
    double fit = 0.0;
    for (int i = 0; i < kBasis; ++i) fit += coef[i] * b[i];
    worst = std::max(worst, std::abs(s.target - fit));
  }
  info_.fit_residual = worst;
}

std::size_t KernelTable::orthant_index(const Coord& abs_offset) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) idx = idx * static_cast<std::size_t>(radius_ + 1) + abs_offset[i];
  return idx;
}

double KernelTable::table_value(const Coord& offset) const {
  Coord a{};
  for (int i = 0; i < dim_; ++i) {
    a[i] = std::abs(offset[i]);
    if (a[i] > radius_) throw DomainError("offset outside the kernel table");
  }
  return values_[orthant_index(a)];
}

double KernelTable::far_field(const Coord& offset) const {
  double r2 = 0.0;
  for (int i = 0; i < dim_; ++i) r2 += static_cast<double>(offset[i]) * offset[i];
  if (r2 == 0.0) throw SingularityError("far-field expansion evaluated at the origin");
  if (dim_ == 2) {
    const double phi = std::atan2(static_cast<double>(offset[1]), static_cast<double>(offset[0]));
    return 0.5 * kTwoOverPi * std::log(r2) + info_.kappa + info_.correction * std::cos(4.0 * phi) / r2 +
           (info_.higher[0] * std::cos(4.0 * phi) + info_.higher[1] * std::cos(8.0 * phi)) / (r2 * r2);
  }
  return kernel_constant(dim_) * std::pow(r2, 0.5 * (2 - dim_));
}

double KernelTable::operator()(const Coord& offset) const {
  Coord a{};
  for (int i = 0; i < dim_; ++i) {
    a[i] = std::abs(offset[i]);
    if (a[i] > radius_) return far_field(offset);
  }
  return values_[orthant_index(a)];
}

void KernelTable::save(const std::filesystem::path& path) const {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write kernel table to " + path.string());
    os.write(kMagic, 4);
    write_le<std::int32_t>(os, dim_);
    write_le<std::int32_t>(os, radius_);
    for (double v : values_) write_le<double>(os, v);
    if (!os) throw ValidationError("failed writing kernel table to " + path.string());
  }
  nlohmann::json meta = {{"dimension", dim_},
                         {"radius", radius_},
                         {"kappa", info_.kappa},
                         {"correction", info_.correction},
                         {"higher_corrections", info_.higher},
                         {"fit_residual", info_.fit_residual},
                         {"tolerance", info_.tolerance},
                         {"construction_error", info_.construction_error}};
  std::ofstream js(sidecar_path(path));
  js << meta.dump(2) << '\n';
}

KernelTable KernelTable::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open kernel table " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ValidationError("bad kernel table magic in " + path.string());
  const int dim = read_le<std::int32_t>(is);
  const int radius = read_le<std::int32_t>(is);
  if (dim < 2 || dim > kMaxDim || radius < 1 || radius > 4096) {
    throw ValidationError("bad kernel table header in " + path.string());
  }
  std::vector<double> values(power(static_cast<std::size_t>(radius + 1), dim));
  for (double& v : values) v = read_le<double>(is);
  KernelTableInfo info;
  if (std::ifstream js(sidecar_path(path)); js) {
    const auto meta = nlohmann::json::parse(js, nullptr, false);
    if (!meta.is_discarded()) {
      info.tolerance = meta.value("tolerance", 0.0);
      info.construction_error = meta.value("construction_error", 0.0);
    }
  }
  KernelTable table(dim, radius, std::move(values), info);
  table.fit_far_field();
  return table;
}

int default_kernel_radius(int dim) { return dim == 4 ? 16 : 64; }

const KernelTable& kernel_table(int dim) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<KernelTable>> tables;
  std::lock_guard lock(mutex);
  if (auto it = tables.find(dim); it != tables.end()) return *it->second;
  const int radius = default_kernel_radius(dim);
  const auto dir = cache_dir();
  const auto file = dir / ("kernel_d" + std::to_string(dim) + "_R" + std::to_string(radius) + ".gkt");
  std::unique_ptr<KernelTable> table;
  std::error_code ec;
  if (std::filesystem::exists(file, ec)) {
    try {
      auto loaded = KernelTable::load(file);
      if (loaded.dim() == dim && loaded.radius() == radius) table = std::make_unique<KernelTable>(std::move(loaded));
    } catch (const Error&) {
      table.reset();
    }
  }
  if (!table) {
    table = std::make_unique<KernelTable>(KernelTable::build(dim, radius));
    std::filesystem::create_directories(dir, ec);
    try {
      if (!ec) table->save(file);
    } catch (const Error&) {
      // an unwritable cache only costs a rebuild next time
    }
  }
  return *tables.emplace(dim, std::move(table)).first->second;
}

}  // namespace agg
