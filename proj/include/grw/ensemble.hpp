#pragma once

#include "grw/oracle.hpp"
#include "grw/scenario.hpp"
#include "grw/statistics.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grw {

/// Counts over equal-width bins starting at `lower`.
struct Histogram {
  std::string name;
  double lower = 0.0;
  double width = 1.0;
  std::vector<std::uint64_t> counts;
};

struct EnsembleOptions {
  std::size_t trajectories = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Horizon doubles once when a limit statistic is inconclusive.
  bool auto_extend = true;
  /// Reference for the GRWf fresh-preparation first-window test. When empty
  /// it is computed by the flash-sequence oracle.
  std::optional<oracle::VerdictProbabilities> first_window_reference;
};

struct EnsembleSummary {
  ScenarioConfig config;  // as run, including any horizon extension
  std::size_t n_trajectories = 0;
  std::size_t failed_trajectories = 0;
  std::optional<std::string> first_failure;
  bool horizon_extended = false;
  std::vector<StatisticRecord> statistics;
  std::vector<Histogram> histograms;

  bool all_pass() const;
  const StatisticRecord& statistic(const std::string& name) const;
};

/// Purpose tag in the top byte of a stream id, so every random draw of an
/// ensemble has its own substream.
enum class StreamPurpose : std::uint64_t { Dynamics = 0, History = 1, FirstWindow = 2 };

std::uint64_t stream_id(StreamPurpose purpose, std::size_t index);

/// One system of one ensemble member, exactly as run_ensemble simulates it.
struct SimulatedSystem {
  std::vector<Flash> prior_flashes;
  TrajectoryRecord record;
};

SimulatedSystem simulate_system(const ScenarioConfig& config, std::uint64_t seed, std::size_t trajectory, int marble);

/// Runs `options.trajectories` independent ensemble members (each of
/// n_marbles systems) on `options.threads` workers and folds the results in
/// trajectory order, so the summary does not depend on the thread count.
EnsembleSummary run_ensemble(const ScenarioConfig& config, const EnsembleOptions& options);
EnsembleSummary run_ensemble(const ScenarioConfig& config, std::size_t n_traj, std::uint64_t seed,
                             unsigned threads = 1);

/// Thread count from GRWSIM_THREADS, or 1 when unset or invalid.
unsigned default_thread_count();

}  // namespace grw
