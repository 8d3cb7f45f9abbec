#include <filesystem>
#include <fstream>

#include "agg/acceptance.hpp"
#include "agg/errors.hpp"
#include "agg/experiment.hpp"
#include "agg/io.hpp"
#include "doctest.h"

using namespace agg;

namespace {

std::filesystem::path out_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "agg_experiment_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig config_from(const std::string& text, const std::string& output) {
  return make_config(apply_overrides(parse_config_text(text), {{"output", out_dir(output).string()}}));
}

}  // namespace

TEST_CASE("key=value parsing keeps repeated keys in order") {
  const auto e = parse_config_text("# comment\nmodel = idla\nseed = 3\nseed=4 # trailing\n\n");
  REQUIRE(e.size() == 3);
  CHECK(e[1] == std::pair<std::string, std::string>{"seed", "3"});
  CHECK(e[2].second == "4");
  CHECK_THROWS_AS(parse_config_text("model idla\n"), ValidationError);
}

TEST_CASE("JSON configs are equivalent to key=value") {
  const auto text = parse_config_text("model = smash-sum\nball = -0.5,0,0.7\nball = 0.5,0,0.7\nengine = solver\n");
  const auto json = parse_config_text(
      R"({"model": "smash-sum", "ball": [[-0.5, 0, 0.7], [0.5, 0, 0.7]], "engine": ["solver"]})");
  const ExperimentConfig a = make_config(text);
  const ExperimentConfig b = make_config(json);
  CHECK(a.sets.size() == b.sets.size());
  CHECK(a.engines == b.engines);
  CHECK(a.density.total_mass() == doctest::Approx(b.density.total_mass()));
}

TEST_CASE("overrides replace every entry of a key") {
  const auto e = apply_overrides(parse_config_text("seed = 1\nseed = 2\nmodel = idla\n"), {{"seed", "9"}});
  int seeds = 0;
  for (const auto& [k, v] : e) {
    if (k == "seed") {
      ++seeds;
      CHECK(v == "9");
    }
  }
  CHECK(seeds == 1);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_WITH_AS(make_config(parse_config_text("model = idla\npoint = 0,0,100\n")),
                       "seed: idla needs at least one seed", ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = sandpile\npoint = 0,0,5\nseed = 1\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = sandpile\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = sandpile\npoint = 0,0,5\ncolour = red\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = dla\npoint = 0,0,5\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = sandpile\nspacing = -1\npoint = 0,0,5\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = sandpile\ndensity_file = /nonexistent\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = smash-sum\nball = 0,0,1\n")), ValidationError);
  CHECK_THROWS_AS(make_config(parse_config_text("model = variant-absorb\n")), ValidationError);
}

TEST_CASE("sandpile single source of five particles") {
  const ExperimentConfig c = config_from("model = sandpile\npoint = 0,0,5\nspacing = 1\n", "m5");
  const RunReport r = run_experiment(c);
  const auto& m = r.body["metrics"];
  CHECK(m["domain"]["volume"].get<double>() == doctest::Approx(5.0));
  CHECK(m["odometer_max"].get<double>() == doctest::Approx(4.0));
  CHECK(std::filesystem::exists(c.output / "report.json"));
  CHECK(std::filesystem::exists(c.output / "domain.pgm"));
  for (const auto& f : r.outputs) CHECK(sha256_file(c.output / f.path) == f.sha256);
}

TEST_CASE("sandpile volume scales with spacing") {
  const ExperimentConfig c = config_from("model = sandpile\npoint = 0,0,0.05\nspacing = 0.1\n", "m5fine");
  const RunReport r = run_experiment(c);
  CHECK(r.body["metrics"]["domain"]["volume"].get<double>() == doctest::Approx(5 * 0.01));
  CHECK(r.body["metrics"]["odometer_max"].get<double>() == doctest::Approx(4 * 0.01));
}

TEST_CASE("two-square smash sum with every engine") {
  const std::string text =
      "model = smash-sum\nblock = -0.5,-0.5,19.5,19.5\nblock = 9.5,9.5,29.5,29.5\n"
      "seed = 1\nseed = 2\nepsilon = 3\n";
  const ExperimentConfig c = config_from(text, "fig1");
  const RunReport r = run_experiment(c);
  const auto& m = r.body["metrics"];
  CHECK(m["engines"].size() == 4);
  CHECK(m["pairwise"].size() == 6);
  CHECK(m["engines"]["rotor"][0]["sites"].get<int>() == 800);
  CHECK(m["engines"]["idla"].size() == 2);
  CHECK(m["shape_checks_vs_solver"]["rotor"][0]["verdict"] == "pass");
  for (const auto& row : m["pairwise"]) CHECK(row["relative"].get<double>() < 0.1);
  CHECK(std::filesystem::exists(c.output / "smash_idla_seed2.csv"));
}

TEST_CASE("runs are byte-for-byte reproducible") {
  const std::string text = "model = rotor\npoint = 0,0,400\nrotors = random\nrotor_seed = 5\nreference = ball\n";
  const RunReport a = run_experiment(config_from(text, "rep_a"));
  const RunReport b = run_experiment(config_from(text, "rep_b"));
  REQUIRE(a.outputs.size() == b.outputs.size());
  for (std::size_t i = 0; i < a.outputs.size(); ++i) {
    CHECK(a.outputs[i].path == b.outputs[i].path);
    CHECK(a.outputs[i].sha256 == b.outputs[i].sha256);
  }
  CHECK(a.body["metrics"] == b.body["metrics"]);
}

TEST_CASE("idla runs write one mask per seed") {
  const ExperimentConfig c = config_from("model = idla\npoint = 0,0,300\nseed = 5\nseed = 6\nreference = ball\n", "idla");
  const RunReport r = run_experiment(c);
  CHECK(r.body["metrics"]["runs"].size() == 2);
  CHECK(std::filesystem::exists(c.output / "domain_seed6.csv"));
}

TEST_CASE("density files") {
  const auto dir = out_dir("density");
  std::filesystem::create_directories(dir);
  const auto file = dir / "sigma.csv";
  std::ofstream(file) << "# i,j,mass\n0,0,3\n1,0,2.5\n";
  const ExperimentConfig c = make_config(parse_config_text("model = sandpile\ndensity_file = " + file.string() +
                                                           "\noutput = " + (dir / "out").string() + "\n"));
  const RunReport r = run_experiment(c);
  CHECK(r.body["metrics"]["total_mass"].get<double>() == doctest::Approx(5.5));
  const ExperimentConfig rotor = make_config(parse_config_text("model = rotor\ndensity_file = " + file.string() +
                                                               "\noutput = " + (dir / "r").string() + "\n"));
  CHECK_THROWS_AS(run_experiment(rotor), ValidationError);
}

TEST_CASE("obstacle and variant models") {
  const RunReport o = run_experiment(
      config_from("model = obstacle-continuum\nspacing = 0.05\nball = 0,0,1,2\nreference = ball\nepsilon = 0.1\n", "obs"));
  CHECK(o.body["metrics"]["reference"]["shape_check"]["verdict"] == "pass");
  const RunReport d = run_experiment(config_from("model = obstacle-discrete\npoint = 0,0,200\n", "obsd"));
  CHECK(d.body["metrics"]["domain"]["sites"].get<int>() > 150);
  const RunReport v = run_experiment(config_from("model = variant-directed\nparticles = 300\n", "var"));
  CHECK(v.body["metrics"]["domain"]["sites"].get<int>() == 300);
}

TEST_CASE("acceptance suite runs selected criteria and reports them") {
  AcceptanceOptions options;
  options.only = {3, 11, 12};
  options.jobs = 2;
  const auto results = run_acceptance_suite(options);
  REQUIRE(results.size() == 3);
  for (const auto& r : results) CHECK(r.passed);
  const auto table = verdict_table(results, options.tier);
  CHECK(table["passed"] == true);
  CHECK(format_line(results[0]).rfind("PASS  3", 0) == 0);
  options.only = {14};
  CHECK_THROWS_AS(run_acceptance_suite(options), ValidationError);
}

TEST_CASE("a corrupted rotor order is caught") {
  AcceptanceOptions options;
  options.only = {5};
  options.corrupt_rotor_order = true;
  options.artifacts = out_dir("artifacts");
  const auto results = run_acceptance_suite(options);
  CHECK_FALSE(results[0].passed);
  CHECK(std::filesystem::exists(options.artifacts / "rotor_determinism_diff.pgm"));
}
