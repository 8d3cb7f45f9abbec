// agglab: run aggregation experiments, the acceptance suite, or render masks.
//
//   agglab run config.txt --set spacing=0.02 --set output=out
//   agglab accept --tier fast --jobs 4 --json verdicts.json
//   agglab render out/domain.csv -o domain.pgm
//
// Exit codes: 0 pass, 2 validation error, 3 engine error, 4 acceptance failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agg/acceptance.hpp"
#include "agg/errors.hpp"
#include "agg/experiment.hpp"
#include "agg/io.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kEngine = 3;
constexpr int kAcceptance = 4;

agg::ConfigEntries parse_sets(const std::vector<std::string>& sets) {
  agg::ConfigEntries out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw agg::ValidationError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

int run_command(const std::string& path, const std::vector<std::string>& sets) {
  agg::ConfigEntries entries = agg::read_config_file(path);
  const agg::ConfigEntries overrides = parse_sets(sets);
  // List keys given on the command line replace the file's list.
  entries = agg::apply_overrides(std::move(entries), overrides);
  const agg::ExperimentConfig config = agg::make_config(entries);
  const agg::RunReport report = agg::run_experiment(config);
  std::cout << "model " << agg::to_string(config.model) << ", " << report.outputs.size() << " files in "
            << config.output.string() << " (" << report.wall_seconds << " s)\n";
  std::cout << report.body["metrics"].dump(2) << '\n';
  return 0;
}

int accept_command(const agg::AcceptanceOptions& options, const std::string& json_path) {
  const auto results = agg::run_acceptance_suite(options, &std::cout);
  const auto table = agg::verdict_table(results, options.tier);
  if (!json_path.empty()) {
    std::ofstream os(json_path);
    os << table.dump(2) << '\n';
    if (!os) throw agg::ValidationError("cannot write " + json_path);
  }
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::cout << passed << "/" << results.size() << " criteria passed (" << agg::to_string(options.tier) << " tier)\n";
  return passed == results.size() ? 0 : kAcceptance;
}

int render_command(const std::string& path, std::string out, bool ascii) {
  const agg::DomainMask mask = agg::read_mask_csv(path);
  if (out.empty()) out = std::filesystem::path(path).replace_extension(".pgm").string();
  agg::write_mask_pgm(mask, out);
  std::cout << agg::count(mask) << " sites on " << mask.spec().describe() << " -> " << out << '\n';
  if (ascii) {
    const auto& spec = mask.spec();
    for (int y = spec.hi()[1]; y >= spec.lo()[1]; --y) {
      std::string row;
      for (int x = spec.lo()[0]; x <= spec.hi()[0]; ++x) row += mask.at(agg::make_coord({x, y})) ? '#' : '.';
      std::cout << row << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aggregation models, their continuum limits and acceptance checks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::vector<std::string> sets;
  run->add_option("config", config_path, "key=value or JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override a config key (key=value, repeatable)");

  auto* accept = app.add_subcommand("accept", "Run the acceptance suite");
  agg::AcceptanceOptions options;
  std::string tier = "fast";
  std::string json_path;
  std::string artifacts = options.artifacts.string();
  std::string fault;
  accept->add_option("--tier", tier, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  accept->add_option("--jobs", options.jobs, "Criteria run concurrently")->check(CLI::PositiveNumber);
  accept->add_option("--only", options.only, "Run only these criteria")->delimiter(',');
  accept->add_option("--json", json_path, "Write the verdict table here");
  accept->add_option("--artifacts", artifacts, "Directory for diff artifacts");
  accept->add_option("--inject-fault", fault, "Deliberately break an engine")->check(CLI::IsMember({"rotor-order"}));

  auto* render = app.add_subcommand("render", "Convert a mask CSV to PGM");
  std::string mask_path;
  std::string out_path;
  bool ascii = false;
  render->add_option("mask", mask_path, "Mask CSV")->required()->check(CLI::ExistingFile);
  render->add_option("-o,--output", out_path, "PGM path (default: mask path with .pgm)");
  render->add_flag("--ascii", ascii, "Also print the mask as text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (*run) return run_command(config_path, sets);
    if (*accept) {
      options.tier = agg::parse_tier(tier);
      options.artifacts = artifacts;
      options.corrupt_rotor_order = fault == "rotor-order";
      return accept_command(options, json_path);
    }
    return render_command(mask_path, out_path, ascii);
  } catch (const agg::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "engine error: " << e.what() << '\n';
    return kEngine;
  }
}
