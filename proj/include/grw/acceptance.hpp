#pragma once

#include "grw/ensemble.hpp"
#include "grw/oracle.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grw {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;     // statistic passed and ran within budget
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  /// Reference values from `grwsim oracle`; recomputed when absent.
  std::optional<oracle::ReferenceValues> reference;
  /// Criteria to run (1..12); empty runs all.
  std::vector<int> only;
  /// If set, each ensemble criterion writes its summary CSV here.
  std::optional<std::filesystem::path> summary_dir;
};

inline constexpr int kCriterionCount = 12;

/// Scenario and ensemble size used by an ensemble-based criterion
/// (3, 4, 5, 6, 10, 11); throws std::out_of_range for the others.
struct EnsembleCriterion {
  ScenarioConfig config;
  std::size_t trajectories = 0;
};
EnsembleCriterion ensemble_criterion(int id);

/// Runs the selected criteria in order, invoking `on_result` as each finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3 martingale: ... [1.2 s / 60 s]"
std::string format_criterion(const CriterionResult& result);

}  // namespace grw
