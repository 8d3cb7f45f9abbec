#include "agg/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "agg/errors.hpp"
#include "agg/green.hpp"
#include "agg/idla.hpp"
#include "agg/io.hpp"
#include "agg/obstacle.hpp"
#include "agg/rng.hpp"
#include "agg/rotor.hpp"
#include "agg/sandpile.hpp"
#include "agg/shapes.hpp"

namespace agg {

namespace {

using nlohmann::json;

struct Context {
  const AcceptanceOptions& options;
  bool full() const { return options.tier == Tier::Full; }
  double delta(double fine) const { return full() ? fine : std::max(fine, 0.05); }
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

Point origin() { return Point{}; }

ScalarField point_source(double m, double spacing = 1.0) {
  ContinuumDensity sigma(2);
  sigma.add_point_mass(origin(), m * spacing * spacing);
  return discretize_density(aggregation_box(sigma, spacing), sigma, DiscretizeMode::RoundToInteger);
}

/// Values uniform in [0, 4] on a random rectangle of at most 15×15 sites, some sites left empty.
ScalarField random_density(std::uint64_t seed, std::uint64_t index) {
  RngStream rng(seed, index);
  const int w = static_cast<int>(rng.below(15)) + 1;
  const int h = static_cast<int>(rng.below(15)) + 1;
  ScalarField patch(LatticeSpec(2, 1.0, make_coord({-1, -1}), make_coord({w + 2, h + 2})));
  for_each_site_in(patch.spec(), make_coord({0, 0}), make_coord({w - 1, h - 1}), [&](std::size_t i, const Coord&) {
    if (rng.uniform() < 0.7) patch[i] = 4.0 * rng.uniform();
  });
  if (sum(patch) == 0.0) patch.at(make_coord({0, 0})) = 4.0 * rng.uniform() + 1.0;
  return remap(patch, aggregation_box(patch));
}

struct Squares {
  DomainMask a;
  DomainMask b;
  ScalarField sigma;
  ContinuumSet cont_a;
  ContinuumSet cont_b;
};

/// Two 50×50 squares of Z² overlapping in a 25×25 square.
Squares fig1_squares() {
  ScalarField seed(LatticeSpec(2, 1.0, make_coord({0, 0}), make_coord({75, 75})));
  for (int x = 0; x < 75; ++x) {
    for (int y = 0; y < 75; ++y) {
      const bool in_a = x < 50 && y < 50;
      const bool in_b = x >= 25 && y >= 25;
      seed.at(make_coord({x, y})) = static_cast<double>(in_a) + static_cast<double>(in_b);
    }
  }
  const LatticeSpec spec = aggregation_box(seed);
  const auto a = ContinuumSet::box(2, make_point({-0.5, -0.5}), make_point({49.5, 49.5}));
  const auto b = ContinuumSet::box(2, make_point({24.5, 24.5}), make_point({74.5, 74.5}));
  return {a.rasterize(spec), b.rasterize(spec), remap(seed, spec), a, b};
}

RotorField standard_rotors(const LatticeSpec& spec, const Context& ctx) {
  if (!ctx.options.corrupt_rotor_order) return RotorField::uniform(spec, 0);
  DirectionOrder order = DirectionOrder::standard(spec.dim());
  std::swap(order.directions[1], order.directions[2]);
  return RotorField(spec, std::move(order), std::vector<std::uint8_t>(spec.size(), 0));
}

/// Rotor aggregation from the origin written out directly with the N, E, S, W cycle.
std::set<std::pair<int, int>> rotor_oracle(int m) {
  static constexpr int dx[4] = {0, 1, 0, -1};
  static constexpr int dy[4] = {1, 0, -1, 0};
  std::set<std::pair<int, int>> occupied;
  std::map<std::pair<int, int>, int> rotor;
  for (int k = 0; k < m; ++k) {
    std::pair<int, int> p{0, 0};
    while (occupied.count(p)) {
      int& r = rotor[p];
      r = (r + 1) % 4;
      p = {p.first + dx[r], p.second + dy[r]};
    }
    occupied.insert(p);
  }
  return occupied;
}

void odometer_identity(CriterionResult& r, const Context&) {
  const double m = 1e4;
  const ScalarField sigma = point_source(m);
  const SandpileResult pile = stabilize(sigma);
  const ObstacleProblem problem = build_obstacle_discrete(sigma);
  const MajorantSolution sol = least_majorant(problem);
  const ScalarField u = odometer_from_majorant(problem, sol);
  double gap = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) gap = std::max(gap, std::abs(pile.odometer[i] - u[i]));
  const double limit = 1e-6 * m;
  r.passed = gap <= limit;
  r.detail = "max|u_sandpile - (s - gamma)| = " + fmt("%.3g", gap) + " (limit " + fmt("%.3g", limit) + ")";
  r.values = {{"gap", gap}, {"limit", limit}, {"odometer_max", max_abs(pile.odometer)}};
}

void single_source(CriterionResult& r, const Context& ctx) {
  const double m = 1e4;
  const ScalarField sigma = point_source(m);
  const BallSpec ball = ball_of_volume(m, origin(), 2);
  const ContinuumSet disk = ball.set();
  const auto pile = check_shape_convergence(stabilize(sigma).domain, disk, 0.05 * ball.radius);
  const auto rotor =
      check_shape_convergence(rotor_aggregate(sigma, standard_rotors(sigma.spec(), ctx)).occupied, disk,
                              0.05 * ball.radius);
  int idla_pass = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    if (check_shape_convergence(idla_aggregate(sigma, seed).cluster, disk, 0.10 * ball.radius).passed()) ++idla_pass;
  }
  r.passed = pile.passed() && rotor.passed() && idla_pass == 5;
  r.detail = "sandpile " + to_string(pile.verdict) + ", rotor " + to_string(rotor.verdict) + ", idla " +
             std::to_string(idla_pass) + "/5 (r = " + fmt("%.2f", ball.radius) + ")";
  r.values = {{"radius", ball.radius},
              {"sandpile", to_string(pile.verdict)},
              {"rotor", to_string(rotor.verdict)},
              {"idla_passed", idla_pass}};
}

void abelian(CriterionResult& r, const Context&) {
  const std::vector<TopplingSchedule> schedules{TopplingSchedule::raster(), TopplingSchedule::red_black(),
                                                TopplingSchedule::priority_max_excess()};
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const ScalarField sigma = random_density(3, k);
    const AbelianReport rep = verify_abelian(sigma, schedules, 1e-12);
    worst = std::max({worst, rep.max_odometer_gap, rep.max_mass_gap});
  }
  r.passed = worst <= 1e-9;
  r.detail = "20 densities x 3 schedules, max field gap " + fmt("%.3g", worst) + " (limit 1e-09)";
  r.values = {{"max_gap", worst}};
}

void conservation(CriterionResult& r, const Context& ctx) {
  const Squares sq = fig1_squares();
  double worst_mass = 0.0;
  std::vector<ScalarField> densities{sq.sigma};
  for (std::uint64_t k = 0; k < 10; ++k) densities.push_back(random_density(4, k));
  for (const auto& sigma : densities) {
    const SandpileResult pile = stabilize(sigma);
    worst_mass = std::max(worst_mass, std::abs(sum(pile.mass) - sum(sigma)) / sum(sigma));
  }
  const ScalarField point = point_source(1000);
  bool counts = true;
  for (const ScalarField* sigma : {&point, &sq.sigma}) {
    const auto expected = static_cast<std::size_t>(sum(*sigma));
    counts = counts && count(rotor_aggregate(*sigma, standard_rotors(sigma->spec(), ctx)).occupied) == expected;
    counts = counts && count(idla_aggregate(*sigma, 4).cluster) == expected;
  }
  const std::size_t target = count(sq.a) + count(sq.b);
  bool smash = count(rotor_smash_sum(sq.a, sq.b, standard_rotors(sq.a.spec(), ctx))) == target;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) smash = smash && count(df_smash_sum(sq.a, sq.b, seed)) == target;
  r.passed = worst_mass <= 1e-9 && counts && smash;
  r.detail = "sandpile relative mass gap " + fmt("%.3g", worst_mass) + ", rotor/idla counts " +
             (counts ? "exact" : "WRONG") + ", |A+B| = |A|+|B| " + (smash ? "exact" : "WRONG");
  r.values = {{"mass_gap", worst_mass}, {"counts_exact", counts}, {"smash_exact", smash}};
}

void rotor_flow(CriterionResult& r, const Context& ctx) {
  double worst = 0.0;
  for (double m : {1e3, 1e4}) {
    const ScalarField sigma = point_source(m);
    worst = std::max(worst, odometer_flow_check(rotor_aggregate(sigma, standard_rotors(sigma.spec(), ctx), true)));
  }
  const int m = 1000;
  const ScalarField sigma = point_source(m);
  const DomainMask engine = rotor_aggregate(sigma, standard_rotors(sigma.spec(), ctx)).occupied;
  DomainMask expected(sigma.spec());
  for (const auto& [x, y] : rotor_oracle(m)) expected.at(make_coord({x, y})) = 1;
  DomainMask diff(sigma.spec());
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = engine[i] != expected[i];
    mismatches += diff[i];
  }
  std::string artifact;
  if (mismatches > 0) {
    const auto path = ctx.options.artifacts / "rotor_determinism_diff";
    write_mask_pgm(diff, path.string() + ".pgm");
    write_mask_csv(diff, path.string() + ".csv");
    artifact = ", diff in " + path.string() + ".{pgm,csv}";
  }
  r.passed = worst <= 6.0 && mismatches == 0;
  r.detail = "max|rho| = " + fmt("%g", worst) + " (limit 6), m = 1000 cluster vs direct trace: " +
             std::to_string(mismatches) + " mismatched sites" + artifact;
  r.values = {{"max_rho", worst}, {"mismatches", mismatches}};
}

void ball_inflation(CriterionResult& r, const Context& ctx) {
  const double delta = ctx.delta(0.02);
  ContinuumDensity sigma(2);
  sigma.add(2.0, ContinuumSet::ball(2, origin(), 1.0));
  const LatticeSpec spec = aggregation_box(sigma, delta);
  const MajorantSolution sol = least_majorant(build_obstacle_continuum(sigma, spec));
  double r_out = 0.0;
  double r_in = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Point x = spec.point(i);
    const double n = std::hypot(x[0], x[1]);
    if (sol.domain[i]) r_out = std::max(r_out, n);
    else r_in = std::min(r_in, n);
  }
  const double target = std::numbers::sqrt2;
  r.passed = std::abs(r_in - target) <= 0.05 && std::abs(r_out - target) <= 0.05;
  r.detail = "delta " + fmt("%g", delta) + ": inner radius " + fmt("%.4f", r_in) + ", outer " + fmt("%.4f", r_out) +
             " (sqrt 2 +- 0.05)";
  r.values = {{"delta", delta}, {"r_in", r_in}, {"r_out", r_out}};
}

void volume_additivity(CriterionResult& r, const Context& ctx) {
  const double delta = ctx.delta(0.01);
  const auto a = ContinuumSet::ball(2, make_point({-0.8, 0.0}), 1.0);
  const auto b = ContinuumSet::ball(2, make_point({0.8, 0.0}), 1.0);
  const LatticeSpec spec = aggregation_box(ContinuumDensity::indicator_sum(2, {a, b}), delta);
  const DomainMask sum_ab = smash_sum_continuum(a, b, spec);
  const double volume = count(sum_ab) * delta * delta;
  const double target = 2.0 * std::numbers::pi;
  const double error = (volume - target) / target;
  r.passed = std::abs(error) <= 0.015;
  r.detail = "delta " + fmt("%g", delta) + ": volume " + fmt("%.5f", volume) + " vs 2pi, error " +
             fmt("%+.3f%%", 100 * error) + " (limit 1.5%)";
  r.values = {{"delta", delta}, {"volume", volume}, {"relative_error", error}};
}

void quartic(CriterionResult& r, const Context& ctx) {
  const double delta = ctx.delta(0.01);
  const double radius = 1.5;
  const auto a = ContinuumSet::ball(2, make_point({-1.0, 0.0}), radius);
  const auto b = ContinuumSet::ball(2, make_point({1.0, 0.0}), radius);
  const LatticeSpec spec = LatticeSpec::covering_box(2, delta, make_point({-3.2, -2.4}), make_point({3.2, 2.4}));
  const QuarticCheck check = quartic_boundary_check(smash_sum_continuum(a, b, spec), radius);
  r.passed = check.fraction >= 0.98;
  r.detail = "delta " + fmt("%g", delta) + ": " + std::to_string(check.sign_changes) + "/" +
             std::to_string(check.checked) + " boundary sites = " + fmt("%.2f%%", 100 * check.fraction) +
             " (need 98%)";
  r.values = {{"delta", delta}, {"checked", check.checked}, {"sign_changes", check.sign_changes},
              {"fraction", check.fraction}};
}

void associativity(CriterionResult& r, const Context& ctx) {
  const double delta = ctx.delta(0.02);
  const auto a = ContinuumSet::ball(2, make_point({-0.5, -0.2}), 0.6);
  const auto b = ContinuumSet::ball(2, make_point({0.5, -0.2}), 0.6);
  const auto c = ContinuumSet::ball(2, make_point({0.0, 0.55}), 0.5);
  const LatticeSpec spec = aggregation_box(ContinuumDensity::indicator_sum(2, {a, b, c}), delta);
  const AssociativityReport rep = associativity_check(a, b, c, spec);
  const double worst = std::max({rep.left_right, rep.left_direct, rep.right_direct});
  const double limit = 0.02 * rep.total_volume;
  r.passed = worst <= limit;
  r.detail = "delta " + fmt("%g", delta) + ": max pairwise d_sym " + fmt("%.4f", worst) + " = " +
             fmt("%.2f%%", 100 * worst / rep.total_volume) + " of volume (limit 2%)";
  r.values = {{"delta", delta}, {"left_right", rep.left_right}, {"left_direct", rep.left_direct},
              {"right_direct", rep.right_direct}, {"total_volume", rep.total_volume}};
}

void cross_model(CriterionResult& r, const Context& ctx) {
  const Squares sq = fig1_squares();
  const LatticeSpec& spec = sq.a.spec();
  const double total = static_cast<double>(count(sq.a) + count(sq.b));
  const DomainMask solver = smash_sum_continuum(sq.cont_a, sq.cont_b, spec);
  const DomainMask pile = stabilize(sq.sigma).domain;
  const DomainMask rotor = rotor_smash_sum(sq.a, sq.b, standard_rotors(spec, ctx));
  std::vector<DomainMask> idla;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) idla.push_back(df_smash_sum(sq.a, sq.b, seed));
  auto mean_to_idla = [&](const DomainMask& m) {
    double s = 0.0;
    for (const auto& c : idla) s += symmetric_difference_volume(m, c);
    return s / static_cast<double>(idla.size());
  };
  const double pr = symmetric_difference_volume(pile, rotor);
  const double pi = mean_to_idla(pile);
  const double ri = mean_to_idla(rotor);
  const double worst = std::max({pr, pi, ri});
  bool shapes = check_shape_convergence(pile, solver, 3.0).passed() &&
                check_shape_convergence(rotor, solver, 3.0).passed();
  int idla_shapes = 0;
  for (const auto& c : idla) idla_shapes += check_shape_convergence(c, solver, 3.0).passed();
  shapes = shapes && idla_shapes == static_cast<int>(idla.size());
  r.passed = worst <= 0.07 * total && shapes;
  r.detail = "d_sym sandpile/rotor " + fmt("%.1f%%", 100 * pr / total) + ", sandpile/idla " +
             fmt("%.1f%%", 100 * pi / total) + ", rotor/idla " + fmt("%.1f%%", 100 * ri / total) +
             " (limit 7%); shape vs solver eps 3: " + (shapes ? "all pass" : "FAIL") + " (idla " +
             std::to_string(idla_shapes) + "/10)";
  r.values = {{"sandpile_rotor", pr}, {"sandpile_idla", pi}, {"rotor_idla", ri}, {"total", total},
              {"shapes_pass", shapes}};
}

void green_asymptotics(CriterionResult& r, const Context&) {
  const KernelTable& table = kernel_table(2);
  const double kappa = (2.0 * std::numbers::egamma + std::log(8.0)) / std::numbers::pi;
  double worst = 0.0;
  const int reach = std::min(64, table.radius());
  for (int x = 0; x <= reach; ++x) {
    for (int y = 0; y <= reach; ++y) {
      const double n2 = static_cast<double>(x * x + y * y);
      if (n2 < 64.0 || n2 > 64.0 * 64.0) continue;
      const double a = table.table_value(make_coord({x, y}));
      worst = std::max(worst, n2 * std::abs(a - std::log(n2) / std::numbers::pi - kappa));
    }
  }
  r.passed = worst <= 0.5;
  r.detail = "max |x|^2 |a - (2/pi)log|x| - kappa| = " + fmt("%.4f", worst) + " on 8 <= |x| <= 64 (limit 0.5); kappa " +
             fmt("%.10f", kappa) + ", fitted " + fmt("%.10f", table.info().kappa);
  r.values = {{"scaled_residual", worst}, {"kappa", kappa}, {"fitted_kappa", table.info().kappa}};
}

void exit_time(CriterionResult& r, const Context&) {
  const ExitTimeEstimate e = mc_ball_exit_time(1.0, 0.02, 10000, 12);
  r.passed = e.mean >= 2350.0 && e.mean <= 2700.0;
  r.detail = "r/delta = 50, 10^4 trials: mean " + fmt("%.1f", e.mean) + " +- " + fmt("%.1f", e.standard_error) +
             " (window [2350, 2700])";
  r.values = {{"mean", e.mean}, {"standard_error", e.standard_error}, {"trials", e.trials}};
}

void quadrature(CriterionResult& r, const Context& ctx) {
  const double delta = ctx.delta(0.01);
  const Point c1 = make_point({-0.5, 0.1});
  const Point c2 = make_point({0.5, -0.1});
  const auto b1 = ContinuumSet::ball(2, c1, 0.8);
  const auto b2 = ContinuumSet::ball(2, c2, 0.6);
  const LatticeSpec spec = aggregation_box(ContinuumDensity::indicator_sum(2, {b1, b2}), delta);
  const DomainMask d = smash_sum_continuum(b1, b2, spec);
  ContinuumDensity points(2);
  points.add_point_mass(c1, std::numbers::pi * 0.64);
  points.add_point_mass(c2, std::numbers::pi * 0.36);
  const std::vector<TestFunction> superharmonic{
      TestFunction::constant_function(1.0), TestFunction::green(make_point({4.0, 3.0})),
      TestFunction::green(make_point({0.013, 0.0271})), TestFunction::green(make_point({0.05, 1.6})),
      TestFunction::negative_quadratic(make_point({0.3, 0.2}))};
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  json rows = json::array();
  for (const auto& h : superharmonic) {
    const QuadratureResult q = quadrature_check(d, points, h);
    const double excess = (q.lhs - q.rhs) / std::abs(q.rhs);
    worst = std::max(worst, excess);
    ok = ok && q.lhs <= q.rhs + 0.01 * std::abs(q.rhs);
    rows.push_back({{"h", h.describe()}, {"lhs", q.lhs}, {"rhs", q.rhs}});
  }
  const QuadratureResult aff = quadrature_check(d, points, TestFunction::affine(2.0, make_point({0.5, -0.3})));
  const double aff_error = (aff.lhs - aff.rhs) / std::abs(aff.rhs);
  ok = ok && std::abs(aff_error) <= 0.005;
  rows.push_back({{"h", "affine"}, {"lhs", aff.lhs}, {"rhs", aff.rhs}});
  r.passed = ok;
  r.detail = "delta " + fmt("%g", delta) + ": worst (lhs - rhs)/|rhs| over 5 superharmonic h " +
             fmt("%+.4f", worst) + " (limit +0.01), affine " + fmt("%+.4f", aff_error) + " (limit +-0.005)";
  r.values = {{"delta", delta}, {"worst_excess", worst}, {"affine_error", aff_error}, {"rows", rows}};
}

struct Criterion {
  int id;
  const char* name;
  void (*run)(CriterionResult&, const Context&);
};

constexpr Criterion kCriteria[] = {
    {1, "odometer identity", odometer_identity},
    {2, "single-source limit shape", single_source},
    {3, "abelian property", abelian},
    {4, "mass and cardinality conservation", conservation},
    {5, "rotor odometer flow", rotor_flow},
    {6, "ball inflation", ball_inflation},
    {7, "volume additivity", volume_additivity},
    {8, "two-disk quartic boundary", quartic},
    {9, "associativity", associativity},
    {10, "cross-model agreement", cross_model},
    {11, "green asymptotics", green_asymptotics},
    {12, "ball exit time", exit_time},
    {13, "quadrature inequality", quadrature},
};

}  // namespace

std::string to_string(Tier tier) { return tier == Tier::Full ? "full" : "fast"; }

Tier parse_tier(const std::string& name) {
  if (name == "fast") return Tier::Fast;
  if (name == "full") return Tier::Full;
  throw ValidationError("tier: expected fast or full, got '" + name + "'");
}

std::string format_line(const CriterionResult& result) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %2d  %-34s ", result.passed ? "PASS" : "FAIL", result.id, result.name.c_str());
  return head + result.detail + fmt("  (%.1f s)", result.seconds);
}

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options, std::ostream* log) {
  std::vector<const Criterion*> selected;
  for (const auto& c : kCriteria) {
    if (options.only.empty() || std::find(options.only.begin(), options.only.end(), c.id) != options.only.end()) {
      selected.push_back(&c);
    }
  }
  for (int id : options.only) {
    if (id < 1 || id > static_cast<int>(std::size(kCriteria))) {
      throw ValidationError("no acceptance criterion " + std::to_string(id));
    }
  }
  std::vector<CriterionResult> results(selected.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const Context ctx{options};
  auto worker = [&] {
    for (std::size_t k = next++; k < selected.size(); k = next++) {
      CriterionResult& r = results[k];
      r.id = selected[k]->id;
      r.name = selected[k]->name;
      const auto start = std::chrono::steady_clock::now();
      try {
        selected[k]->run(r, ctx);
      } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << format_line(r) << std::endl;
      }
    }
  };
  const unsigned jobs = std::clamp<unsigned>(options.jobs, 1, static_cast<unsigned>(std::max<std::size_t>(1, selected.size())));
  std::vector<std::jthread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  return results;
}

nlohmann::json verdict_table(const std::vector<CriterionResult>& results, Tier tier) {
  json rows = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"passed", r.passed},
                    {"detail", r.detail},
                    {"seconds", r.seconds},
                    {"values", r.values}});
  }
  return {{"tier", to_string(tier)}, {"passed", all}, {"criteria", rows}};
}

}  // namespace agg
