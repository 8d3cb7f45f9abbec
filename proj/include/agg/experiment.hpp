#pragma once

// Experiment runner: a flat key=value (or JSON) config selects a model, a
// density and a lattice; run_experiment executes it and writes masks, fields
// and a JSON report whose manifest hashes every output file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agg/continuum.hpp"
#include "agg/lattice.hpp"
#include "json.hpp"

namespace agg {

/// Ordered key/value pairs; list-valued keys appear once per element.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Parses "key = value" lines ('#' starts a comment), or a JSON object when
/// the text starts with '{' (arrays become repeated keys).
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries read_config_file(const std::filesystem::path& path);
/// Every key present in `overrides` loses its entries in `base`; then the overrides are appended.
ConfigEntries apply_overrides(ConfigEntries base, const ConfigEntries& overrides);

enum class Model {
  Sandpile,
  Rotor,
  Idla,
  ObstacleDiscrete,
  ObstacleContinuum,
  SmashSum,
  VariantAbsorb,
  VariantDirected,
};

std::string to_string(Model model);
Model parse_model(const std::string& name);

struct ExperimentConfig {
  Model model = Model::Sandpile;
  int dim = 2;
  double spacing = 1.0;
  /// Physical corners of the box; empty means aggregation_box.
  std::optional<std::pair<Point, Point>> box;

  /// Built from ball / block / point entries.
  ContinuumDensity density{2};
  /// The ball and block regions in order, used as summands by smash-sum.
  std::vector<ContinuumSet> sets;
  /// "i,j,...,value" rows replacing the density (lattice models only).
  std::optional<std::filesystem::path> density_file;

  std::vector<std::uint64_t> seeds;
  double sandpile_tol = 1e-10;
  double obstacle_tol = 1e-8;
  std::string schedule = "red-black";
  /// "uniform" or "random".
  std::string rotor_init = "uniform";
  int rotor_direction = 0;
  std::uint64_t rotor_seed = 0;
  /// Particle count for the variants.
  std::uint64_t particles = 0;
  /// smash-sum engines among solver, sandpile, rotor, idla.
  std::vector<std::string> engines;
  /// "none", "ball" or "solver".
  std::string reference = "none";
  /// Physical ε for check_shape_convergence against the reference; 0 skips it.
  double epsilon = 0.0;

  std::filesystem::path output = "agglab-out";
  /// Any of csv, pgm.
  std::vector<std::string> formats{"csv", "pgm"};

  /// The entries the config was built from, echoed in the report.
  ConfigEntries entries;
};

/// Validates and converts entries; throws ValidationError naming the offending key.
ExperimentConfig make_config(const ConfigEntries& entries);

struct OutputFile {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunReport {
  /// Inputs, metrics and manifest; deterministic for a fixed config.
  nlohmann::json body;
  double wall_seconds = 0.0;
  std::vector<OutputFile> outputs;

  /// body plus "wall_seconds".
  nlohmann::json to_json() const;
};

/// Runs the configured engine and writes its outputs plus report.json under config.output.
RunReport run_experiment(const ExperimentConfig& config);

/// Lattice box the experiment runs on.
LatticeSpec experiment_box(const ExperimentConfig& config);

}  // namespace agg
