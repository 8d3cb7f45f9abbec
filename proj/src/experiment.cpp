#include "agg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "agg/errors.hpp"
#include "agg/idla.hpp"
#include "agg/io.hpp"
#include "agg/obstacle.hpp"
#include "agg/rotor.hpp"
#include "agg/sandpile.hpp"
#include "agg/shapes.hpp"

namespace agg {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += ',';
      s += scalar_text(e);
    }
    return s;
  }
  return v.dump();
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ValidationError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ValidationError(key + ": expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

Point to_point(const std::vector<double>& v, std::size_t first, int dim) {
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = v[first + static_cast<std::size_t>(i)];
  return p;
}

TopplingSchedule parse_schedule(const std::string& name) {
  if (name == "raster") return TopplingSchedule::raster();
  if (name == "red-black") return TopplingSchedule::red_black();
  if (name == "priority") return TopplingSchedule::priority_max_excess();
  throw ValidationError("schedule: expected raster, red-black or priority, got '" + name + "'");
}

bool uses_rounded_density(Model m) { return m == Model::Rotor || m == Model::Idla; }

bool is_variant(Model m) { return m == Model::VariantAbsorb || m == Model::VariantDirected; }

ScalarField read_density_file(const std::filesystem::path& path, int dim, double spacing) {
  std::ifstream is(path);
  if (!is) throw ValidationError("density_file: cannot open " + path.string());
  std::vector<std::pair<Coord, double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto v = parse_numbers("density_file", line);
    if (static_cast<int>(v.size()) != dim + 1) {
      throw ValidationError("density_file: row '" + line + "' does not have " + std::to_string(dim + 1) + " columns");
    }
    Coord c{};
    for (int a = 0; a < dim; ++a) {
      if (v[static_cast<std::size_t>(a)] != std::floor(v[static_cast<std::size_t>(a)])) {
        throw ValidationError("density_file: non-integer coordinate in '" + line + "'");
      }
      c[a] = static_cast<int>(v[static_cast<std::size_t>(a)]);
    }
    if (v.back() < 0.0) throw ValidationError("density_file: negative mass in '" + line + "'");
    rows.emplace_back(c, v.back());
  }
  if (rows.empty()) throw ValidationError("density_file: no rows in " + path.string());
  Coord lo = rows.front().first;
  Coord hi = lo;
  for (const auto& [c, m] : rows) {
    for (int a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  Coord extent{};
  for (int a = 0; a < dim; ++a) {
    lo[a] -= 1;
    extent[a] = hi[a] - lo[a] + 2;
  }
  ScalarField field(LatticeSpec(dim, spacing, lo, extent));
  for (const auto& [c, m] : rows) field.at(c) += m;
  return field;
}

/// Cell-union density with the same site values as σ_n.
ContinuumDensity density_of_field(const ScalarField& sigma_n) {
  std::map<double, DomainMask> levels;
  for (std::size_t i = 0; i < sigma_n.size(); ++i) {
    if (sigma_n[i] == 0.0) continue;
    auto it = levels.try_emplace(sigma_n[i], sigma_n.spec()).first;
    it->second[i] = 1;
  }
  ContinuumDensity sigma(sigma_n.spec().dim());
  for (const auto& [value, mask] : levels) sigma.add(value, ContinuumSet::cells(mask));
  return sigma;
}

json lattice_json(const LatticeSpec& spec) {
  json lo = json::array();
  json extent = json::array();
  for (int a = 0; a < spec.dim(); ++a) {
    lo.push_back(spec.lo()[a]);
    extent.push_back(spec.extent()[a]);
  }
  return {{"dim", spec.dim()}, {"spacing", spec.spacing()}, {"lo", lo}, {"extent", extent}};
}

json shape_json(const ShapeCheck& check) {
  return {{"verdict", to_string(check.verdict)},
          {"missing_inner", check.missing_inner.size()},
          {"outside_outer", check.outside_outer.size()}};
}

class Writer {
 public:
  Writer(const ExperimentConfig& config, std::vector<OutputFile>& outputs)
      : root_(config.output), outputs_(outputs) {
    for (const auto& f : config.formats) formats_.insert(f);
  }

  void mask(const std::string& stem, const DomainMask& m) {
    if (formats_.count("csv")) emit(stem + ".csv", [&](const auto& p) { write_mask_csv(m, p); });
    if (formats_.count("pgm")) emit(stem + ".pgm", [&](const auto& p) { write_mask_pgm(m, p); });
  }

  void field(const std::string& stem, const ScalarField& f) {
    if (formats_.count("csv")) emit(stem + ".csv", [&](const auto& p) { write_field_csv(f, p); });
  }

  void rotors(const std::string& stem, const RotorField& r) {
    if (formats_.count("pgm")) emit(stem + ".pgm", [&](const auto& p) { write_rotor_pgm(r, p); });
  }

 private:
  void emit(const std::string& name, const std::function<void(const std::filesystem::path&)>& write) {
    const auto path = root_ / name;
    write(path);
    outputs_.push_back({name, sha256_file(path), std::filesystem::file_size(path)});
  }

  std::filesystem::path root_;
  std::set<std::string> formats_;
  std::vector<OutputFile>& outputs_;
};

struct Reference {
  std::string kind;
  DomainMask mask;
  std::optional<ContinuumSet> shape;
};

Point centroid(const ScalarField& sigma_n) {
  const LatticeSpec& spec = sigma_n.spec();
  Point c{};
  double total = 0.0;
  for (std::size_t i = 0; i < sigma_n.size(); ++i) {
    if (sigma_n[i] == 0.0) continue;
    const Point x = spec.point(i);
    for (int a = 0; a < spec.dim(); ++a) c[a] += sigma_n[i] * x[a];
    total += sigma_n[i];
  }
  for (int a = 0; a < spec.dim(); ++a) c[a] /= total;
  return c;
}

std::optional<Reference> make_reference(const ExperimentConfig& config, const ScalarField& sigma_n) {
  const LatticeSpec& spec = sigma_n.spec();
  if (config.reference == "ball") {
    const double volume = sum(sigma_n) * std::pow(spec.spacing(), spec.dim());
    const BallSpec ball = ball_of_volume(volume, centroid(sigma_n), spec.dim());
    return Reference{"ball", ball.set().rasterize(spec), ball.set()};
  }
  if (config.reference == "solver") {
    const ContinuumDensity sigma = config.density_file ? density_of_field(sigma_n) : config.density;
    return Reference{"solver", occupied_limit(sigma, spec, config.obstacle_tol), std::nullopt};
  }
  return std::nullopt;
}

json compare(const DomainMask& mask, const Reference& ref, double epsilon) {
  const double vol = count(ref.mask) * std::pow(mask.spec().spacing(), mask.spec().dim());
  json j{{"kind", ref.kind},
         {"reference_volume", vol},
         {"d_sym", symmetric_difference_volume(mask, ref.mask)},
         {"d_io", inner_outer_hausdorff(mask, ref.mask)}};
  if (epsilon > 0.0) {
    j["epsilon"] = epsilon;
    j["shape_check"] = shape_json(ref.shape ? check_shape_convergence(mask, *ref.shape, epsilon)
                                            : check_shape_convergence(mask, ref.mask, epsilon));
  }
  return j;
}

json mask_json(const DomainMask& mask) {
  const double cell = std::pow(mask.spec().spacing(), mask.spec().dim());
  return {{"sites", count(mask)}, {"volume", count(mask) * cell}};
}

RotorField initial_rotors(const ExperimentConfig& config, const LatticeSpec& spec) {
  if (config.rotor_init == "random") return RotorField::random(spec, config.rotor_seed);
  return RotorField::uniform(spec, config.rotor_direction);
}

ScalarField lattice_density(const ExperimentConfig& config, const LatticeSpec& spec) {
  if (config.density_file) {
    const ScalarField raw = read_density_file(*config.density_file, config.dim, config.spacing);
    ScalarField out(spec);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == 0.0) continue;
      const Coord c = raw.spec().coord(i);
      if (!spec.contains(c)) throw ValidationError("density_file: site outside the configured box");
      out.at(c) = raw[i];
    }
    if (uses_rounded_density(config.model)) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] != std::floor(out[i])) throw ValidationError("density_file: rotor and idla need integer masses");
      }
    }
    return out;
  }
  return discretize_density(spec, config.density,
                            uses_rounded_density(config.model) ? DiscretizeMode::RoundToInteger
                                                               : DiscretizeMode::ExactAverage);
}

void run_smash_sum(const ExperimentConfig& config, const LatticeSpec& spec, Writer& out, json& metrics) {
  const double cell = std::pow(spec.spacing(), spec.dim());
  std::vector<DomainMask> summands;
  ScalarField sigma(spec);
  for (const auto& s : config.sets) {
    summands.push_back(s.rasterize(spec));
    for (std::size_t i = 0; i < spec.size(); ++i) sigma[i] += summands.back()[i];
  }
  const double total = sum(sigma) * cell;
  metrics["total_volume"] = total;

  std::vector<std::pair<std::string, std::vector<DomainMask>>> results;
  for (const auto& engine : config.engines) {
    std::vector<DomainMask> masks;
    if (engine == "solver") {
      masks.push_back(smash_sum_continuum(config.sets, spec, config.obstacle_tol));
    } else if (engine == "sandpile") {
      StabilizeOptions options;
      options.schedule = parse_schedule(config.schedule);
      options.tol = config.sandpile_tol;
      masks.push_back(stabilize(sigma, options).domain);
    } else if (engine == "rotor") {
      if (summands.size() == 2) {
        masks.push_back(rotor_smash_sum(summands[0], summands[1], initial_rotors(config, spec)));
      } else {
        masks.push_back(rotor_aggregate(sigma, initial_rotors(config, spec)).occupied);
      }
    } else {
      for (auto seed : config.seeds) {
        masks.push_back(summands.size() == 2 ? df_smash_sum(summands[0], summands[1], seed)
                                             : idla_aggregate(sigma, seed).cluster);
      }
    }
    json e = json::array();
    for (std::size_t k = 0; k < masks.size(); ++k) {
      std::string stem = "smash_" + engine;
      if (engine == "idla") stem += "_seed" + std::to_string(config.seeds[k]);
      out.mask(stem, masks[k]);
      e.push_back(mask_json(masks[k]));
    }
    metrics["engines"][engine] = e;
    results.emplace_back(engine, std::move(masks));
  }

  json table = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      double d = 0.0;
      for (const auto& a : results[i].second) {
        for (const auto& b : results[j].second) d += symmetric_difference_volume(a, b);
      }
      d /= static_cast<double>(results[i].second.size() * results[j].second.size());
      table.push_back({{"a", results[i].first}, {"b", results[j].first}, {"d_sym", d}, {"relative", d / total}});
    }
  }
  metrics["pairwise"] = table;

  const auto solver = std::find_if(results.begin(), results.end(), [](const auto& r) { return r.first == "solver"; });
  if (config.epsilon > 0.0 && solver != results.end()) {
    json checks;
    for (const auto& [engine, masks] : results) {
      if (engine == "solver") continue;
      json e = json::array();
      for (const auto& m : masks) e.push_back(shape_json(check_shape_convergence(m, solver->second.front(), config.epsilon)));
      checks[engine] = e;
    }
    metrics["shape_checks_vs_solver"] = checks;
  }
}

}  // namespace

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries entries;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: JSON config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_array() && !value.empty() && (value.front().is_array() || value.front().is_string())) {
        for (const auto& v : value) entries.emplace_back(key, scalar_text(v));
      } else if (value.is_array() && (key == "seed" || key == "engine" || key == "format")) {
        for (const auto& v : value) entries.emplace_back(key, scalar_text(v));
      } else {
        entries.emplace_back(key, scalar_text(value));
      }
    }
    return entries;
  }
  std::istringstream is(text);
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(number) + ": expected key = value");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

ConfigEntries apply_overrides(ConfigEntries base, const ConfigEntries& overrides) {
  std::set<std::string> keys;
  for (const auto& [k, v] : overrides) keys.insert(k);
  std::erase_if(base, [&](const auto& e) { return keys.count(e.first) > 0; });
  base.insert(base.end(), overrides.begin(), overrides.end());
  return base;
}

std::string to_string(Model model) {
  switch (model) {
    case Model::Sandpile: return "sandpile";
    case Model::Rotor: return "rotor";
    case Model::Idla: return "idla";
    case Model::ObstacleDiscrete: return "obstacle-discrete";
    case Model::ObstacleContinuum: return "obstacle-continuum";
    case Model::SmashSum: return "smash-sum";
    case Model::VariantAbsorb: return "variant-absorb";
    case Model::VariantDirected: return "variant-directed";
  }
  return "unknown";
}

Model parse_model(const std::string& name) {
  for (Model m : {Model::Sandpile, Model::Rotor, Model::Idla, Model::ObstacleDiscrete, Model::ObstacleContinuum,
                  Model::SmashSum, Model::VariantAbsorb, Model::VariantDirected}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("model: unknown model '" + name + "'");
}

ExperimentConfig make_config(const ConfigEntries& entries) {
  ExperimentConfig config;
  config.entries = entries;
  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<std::string>> lists;
  static const std::set<std::string> list_keys{"ball", "block", "point", "seed", "engine", "format"};
  static const std::set<std::string> scalar_keys{"model",      "dim",       "spacing",      "box",
                                                 "density_file", "tol",     "obstacle_tol", "schedule",
                                                 "rotors",     "rotor_direction", "rotor_seed", "particles",
                                                 "reference",  "epsilon",   "output"};
  for (const auto& [key, value] : entries) {
    if (list_keys.count(key)) {
      lists[key].push_back(value);
    } else if (scalar_keys.count(key)) {
      scalars[key] = value;
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = scalars.find(key);
    if (it == scalars.end()) return std::nullopt;
    return it->second;
  };

  const auto model = get("model");
  if (!model) throw ValidationError("config: model is required");
  config.model = parse_model(*model);
  if (auto v = get("dim")) {
    const auto d = parse_unsigned("dim", *v);
    if (d < 2 || d > static_cast<std::uint64_t>(kMaxDim)) {
      throw ValidationError("dim: must be between 2 and " + std::to_string(kMaxDim));
    }
    config.dim = static_cast<int>(d);
  }
  const int d = config.dim;
  if (auto v = get("spacing")) config.spacing = parse_double("spacing", *v);
  if (!(config.spacing > 0.0)) throw ValidationError("spacing: must be positive");
  if (auto v = get("box"); v && *v != "auto") {
    const auto nums = parse_numbers("box", *v);
    if (static_cast<int>(nums.size()) != 2 * d) {
      throw ValidationError("box: expected auto or " + std::to_string(2 * d) + " numbers (lo..., hi...)");
    }
    const Point lo = to_point(nums, 0, d);
    const Point hi = to_point(nums, static_cast<std::size_t>(d), d);
    for (int a = 0; a < d; ++a) {
      if (!(lo[a] < hi[a])) throw ValidationError("box: lo must be below hi on every axis");
    }
    config.box.emplace(lo, hi);
  }

  config.density = ContinuumDensity(d);
  for (const auto& text : lists["ball"]) {
    const auto v = parse_numbers("ball", text);
    const auto n = static_cast<std::size_t>(d);
    if (v.size() != n + 1 && v.size() != n + 2) throw ValidationError("ball: expected center, radius[, weight]");
    if (!(v[n] > 0.0)) throw ValidationError("ball: radius must be positive");
    const double w = v.size() == n + 2 ? v[n + 1] : 1.0;
    auto set = ContinuumSet::ball(d, to_point(v, 0, d), v[n]);
    config.density.add(w, set);
    if (config.model == Model::SmashSum && w != 1.0) throw ValidationError("ball: smash-sum summands have weight 1");
    config.sets.push_back(std::move(set));
  }
  for (const auto& text : lists["block"]) {
    const auto v = parse_numbers("block", text);
    const auto n = static_cast<std::size_t>(2 * d);
    if (v.size() != n && v.size() != n + 1) throw ValidationError("block: expected lo..., hi...[, weight]");
    const Point lo = to_point(v, 0, d);
    const Point hi = to_point(v, static_cast<std::size_t>(d), d);
    for (int a = 0; a < d; ++a) {
      if (!(lo[a] < hi[a])) throw ValidationError("block: lo must be below hi on every axis");
    }
    const double w = v.size() == n + 1 ? v[n] : 1.0;
    auto set = ContinuumSet::box(d, lo, hi);
    config.density.add(w, set);
    if (config.model == Model::SmashSum && w != 1.0) throw ValidationError("block: smash-sum summands have weight 1");
    config.sets.push_back(std::move(set));
  }
  for (const auto& text : lists["point"]) {
    const auto v = parse_numbers("point", text);
    if (static_cast<int>(v.size()) != d + 1) throw ValidationError("point: expected center, mass");
    if (!(v.back() > 0.0)) throw ValidationError("point: mass must be positive");
    config.density.add_point_mass(to_point(v, 0, d), v.back());
  }
  if (auto v = get("density_file")) {
    config.density_file = *v;
    if (!std::filesystem::exists(*config.density_file)) throw ValidationError("density_file: " + *v + " does not exist");
  }

  for (const auto& s : lists["seed"]) config.seeds.push_back(parse_unsigned("seed", s));
  if (auto v = get("tol")) config.sandpile_tol = parse_double("tol", *v);
  if (auto v = get("obstacle_tol")) config.obstacle_tol = parse_double("obstacle_tol", *v);
  if (!(config.sandpile_tol > 0.0) || !(config.obstacle_tol > 0.0)) throw ValidationError("tol: must be positive");
  if (auto v = get("schedule")) {
    parse_schedule(*v);
    config.schedule = *v;
  }
  if (auto v = get("rotors")) {
    if (*v != "uniform" && *v != "random") throw ValidationError("rotors: expected uniform or random");
    config.rotor_init = *v;
  }
  if (auto v = get("rotor_direction")) {
    const auto k = parse_unsigned("rotor_direction", *v);
    if (k >= static_cast<std::uint64_t>(2 * d)) throw ValidationError("rotor_direction: must be below 2d");
    config.rotor_direction = static_cast<int>(k);
  }
  if (auto v = get("rotor_seed")) config.rotor_seed = parse_unsigned("rotor_seed", *v);
  if (auto v = get("particles")) config.particles = parse_unsigned("particles", *v);
  if (auto v = get("reference")) {
    if (*v != "none" && *v != "ball" && *v != "solver") throw ValidationError("reference: expected none, ball or solver");
    config.reference = *v;
  }
  if (auto v = get("epsilon")) config.epsilon = parse_double("epsilon", *v);
  if (config.epsilon < 0.0) throw ValidationError("epsilon: must be nonnegative");
  if (auto v = get("output")) config.output = *v;

  if (lists.count("format")) {
    config.formats = lists["format"];
    for (const auto& f : config.formats) {
      if (f != "csv" && f != "pgm") throw ValidationError("format: expected csv or pgm, got '" + f + "'");
      if (f == "pgm" && d != 2) throw ValidationError("format: pgm output needs dim = 2");
    }
  } else if (d != 2) {
    config.formats = {"csv"};
  }

  const bool has_density = !config.density.empty() || config.density_file.has_value();
  if (is_variant(config.model)) {
    if (d != 2) throw ValidationError("model: the rotor variants are defined on Z^2");
    if (config.particles == 0) throw ValidationError("particles: the rotor variants need a positive particle count");
    if (has_density) throw ValidationError("model: the rotor variants start from the origin; drop the density");
    if (config.reference == "solver") throw ValidationError("reference: the solver has no limit for the rotor variants");
  } else if (!has_density) {
    throw ValidationError("config: a density (ball, block, point or density_file) is required");
  }
  if (config.density_file && !config.density.empty()) {
    throw ValidationError("density_file: cannot be combined with ball, block or point entries");
  }
  if (config.density_file && (config.model == Model::ObstacleContinuum || config.model == Model::SmashSum)) {
    throw ValidationError("density_file: " + to_string(config.model) + " needs a continuum density");
  }

  if (config.model == Model::SmashSum) {
    if (config.sets.size() < 2) throw ValidationError("smash-sum: needs at least two ball or block summands");
    if (!config.density.point_masses().empty()) throw ValidationError("smash-sum: point masses are not sets");
    config.engines = lists.count("engine") ? lists["engine"]
                                           : std::vector<std::string>{"solver", "sandpile", "rotor", "idla"};
    std::set<std::string> seen;
    for (const auto& e : config.engines) {
      if (e != "solver" && e != "sandpile" && e != "rotor" && e != "idla") {
        throw ValidationError("engine: expected solver, sandpile, rotor or idla, got '" + e + "'");
      }
      if (!seen.insert(e).second) throw ValidationError("engine: '" + e + "' listed twice");
    }
  } else if (lists.count("engine")) {
    throw ValidationError("engine: only smash-sum takes engines");
  }

  const bool wants_seeds =
      config.model == Model::Idla ||
      (config.model == Model::SmashSum &&
       std::find(config.engines.begin(), config.engines.end(), "idla") != config.engines.end());
  if (wants_seeds && config.seeds.empty()) throw ValidationError("seed: idla needs at least one seed");
  if (!wants_seeds && !config.seeds.empty()) throw ValidationError("seed: only idla runs take seeds");
  if (config.epsilon > 0.0 && config.reference == "none" && config.model != Model::SmashSum) {
    throw ValidationError("epsilon: set reference to ball or solver for a shape check");
  }
  return config;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j = body;
  j["wall_seconds"] = wall_seconds;
  return j;
}

LatticeSpec experiment_box(const ExperimentConfig& config) {
  if (config.box) return LatticeSpec::covering_box(config.dim, config.spacing, config.box->first, config.box->second);
  if (config.density_file) return aggregation_box(read_density_file(*config.density_file, config.dim, config.spacing));
  return aggregation_box(config.density, config.spacing);
}

RunReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  Writer out(config, report.outputs);
  json& body = report.body;
  body["model"] = to_string(config.model);
  json echo = json::array();
  for (const auto& [k, v] : config.entries) echo.push_back({k, v});
  body["config"] = echo;
  json metrics = json::object();
  std::filesystem::create_directories(config.output);

  const std::string context = to_string(config.model) + ": ";
  try {
    if (is_variant(config.model)) {
      const DomainMask mask = config.model == Model::VariantAbsorb ? rotor_variant_absorbing_axis(config.particles)
                                                                   : rotor_variant_directed_axis(config.particles);
      body["lattice"] = lattice_json(mask.spec());
      body["direction_order"] = DirectionOrder::standard(2).describe();
      metrics["particles"] = config.particles;
      metrics["domain"] = mask_json(mask);
      out.mask("domain", mask);
      if (config.reference == "ball") {
        ScalarField sigma(mask.spec());
        sigma.at(Coord{}) = static_cast<double>(config.particles);
        metrics["reference"] = compare(mask, *make_reference(config, sigma), config.epsilon);
      }
    } else {
      const LatticeSpec spec = experiment_box(config);
      body["lattice"] = lattice_json(spec);
      const double cell = std::pow(spec.spacing(), spec.dim());
      if (config.model == Model::SmashSum) {
        body["direction_order"] = DirectionOrder::standard(spec.dim()).describe();
        run_smash_sum(config, spec, out, metrics);
        if (auto ref = config.reference != "none" ? make_reference(config, discretize_density(spec, config.density,
                                                                                               DiscretizeMode::ExactAverage))
                                                  : std::nullopt) {
          out.mask("reference", ref->mask);
          metrics["reference"] = mask_json(ref->mask);
        }
      } else {
        const ScalarField sigma = lattice_density(config, spec);
        metrics["total_mass"] = sum(sigma) * cell;
        DomainMask domain(spec);
        switch (config.model) {
          case Model::Sandpile: {
            StabilizeOptions options;
            options.schedule = parse_schedule(config.schedule);
            options.tol = config.sandpile_tol;
            const SandpileResult r = stabilize(sigma, options);
            domain = r.domain;
            metrics["schedule"] = config.schedule;
            metrics["sweeps"] = r.sweeps;
            metrics["topplings"] = r.topplings;
            metrics["odometer_max"] = max_abs(r.odometer);
            metrics["mass_error"] = std::abs(sum(r.mass) - sum(sigma)) * cell;
            metrics["identity_residual"] = odometer_identity_residual(sigma, r.mass, r.odometer);
            out.field("odometer", r.odometer);
            out.field("mass", r.mass);
            break;
          }
          case Model::Rotor: {
            body["direction_order"] = DirectionOrder::standard(spec.dim()).describe();
            const RotorAggState s = rotor_aggregate(sigma, initial_rotors(config, spec), true);
            domain = s.occupied;
            metrics["rotors"] = config.rotor_init;
            metrics["steps"] = s.steps;
            metrics["flow_max"] = odometer_flow_check(s);
            metrics["odometer_max"] = max_abs(s.odometer());
            out.field("odometer", s.odometer());
            out.rotors("rotors", s.rotors);
            break;
          }
          case Model::Idla: {
            json runs = json::array();
            for (std::size_t k = 0; k < config.seeds.size(); ++k) {
              const IdlaResult r = idla_aggregate(sigma, config.seeds[k]);
              json run{{"seed", config.seeds[k]}, {"steps", r.steps}, {"domain", mask_json(r.cluster)}};
              if (auto ref = make_reference(config, sigma)) run["reference"] = compare(r.cluster, *ref, config.epsilon);
              runs.push_back(run);
              out.mask("domain_seed" + std::to_string(config.seeds[k]), r.cluster);
              if (k == 0) domain = r.cluster;
            }
            metrics["runs"] = runs;
            break;
          }
          case Model::ObstacleDiscrete:
          case Model::ObstacleContinuum: {
            const ObstacleProblem problem = config.model == Model::ObstacleDiscrete
                                                ? build_obstacle_discrete(sigma)
                                                : build_obstacle_continuum(config.density, spec);
            MajorantOptions options;
            options.tol = config.obstacle_tol;
            const MajorantSolution sol = least_majorant(problem, options);
            domain = sol.domain;
            const ScalarField u = odometer_from_majorant(problem, sol);
            metrics["iterations"] = sol.iterations;
            metrics["residual"] = sol.residual;
            metrics["threshold"] = sol.threshold;
            metrics["odometer_max"] = max_abs(u);
            out.field("majorant", sol.s);
            out.field("odometer", u);
            break;
          }
          default:
            break;
        }
        if (config.model != Model::Idla) {
          metrics["domain"] = mask_json(domain);
          out.mask("domain", domain);
          if (auto ref = make_reference(config, sigma)) metrics["reference"] = compare(domain, *ref, config.epsilon);
        }
      }
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(context + e.what(), e.residual_history());
  } catch (const BoxTooSmallError& e) {
    throw BoxTooSmallError(context + e.what());
  } catch (const Error& e) {
    throw Error(context + e.what());
  }

  body["metrics"] = metrics;
  json manifest = json::array();
  for (const auto& f : report.outputs) manifest.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  body["outputs"] = manifest;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream os(config.output / "report.json");
  os << report.to_json().dump(2) << '\n';
  if (!os) throw ValidationError("cannot write " + (config.output / "report.json").string());
  return report;
}

}  // namespace agg
