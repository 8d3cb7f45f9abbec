#pragma once

// Acceptance suite: thirteen end-to-end checks of the engines against the
// identities and limit shapes they are meant to reproduce. The fast tier
// coarsens the continuum grids to δ = 0.05; the full tier runs the finest
// parameters.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace agg {

enum class Tier { Fast, Full };

std::string to_string(Tier tier);
Tier parse_tier(const std::string& name);

struct AcceptanceOptions {
  Tier tier = Tier::Fast;
  /// Criteria run concurrently on this many threads.
  unsigned jobs = 1;
  /// Empty runs all criteria.
  std::vector<int> only;
  /// Diff images and site lists from failed comparisons go here.
  std::filesystem::path artifacts = "acceptance-artifacts";
  /// Fault injection: runs the rotor engine with a permuted direction order.
  bool corrupt_rotor_order = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  nlohmann::json values = nlohmann::json::object();
};

/// "PASS  3  abelian property  <detail>  (0.4 s)".
std::string format_line(const CriterionResult& result);

/// Runs the suite, writing each line to `log` (if set) as its criterion finishes.
std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options, std::ostream* log = nullptr);

/// {"tier", "passed", "criteria": [...]}.
nlohmann::json verdict_table(const std::vector<CriterionResult>& results, Tier tier);

}  // namespace agg
