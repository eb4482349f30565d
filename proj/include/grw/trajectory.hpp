#pragma once

#include "grw/branch_state.hpp"
#include "grw/grid_wavefunction.hpp"
#include "grw/propagation.hpp"
#include "grw/rng.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace grw {

/// Either state model; a trajectory owns exactly one.
using SystemState = std::variant<BranchState, GridWaveFunctiond>;

int num_particles(const SystemState& state);

struct GrwParams {
  double lambda_eff = 1.0;  // per-particle collapse rate
  double sigma = 1.0;       // collapse width
  double total_time = 1.0;
  Hamiltonian hamiltonian = ZeroHamiltonian{};

  /// Throws std::invalid_argument for non-positive parameters or a free
  /// Hamiltonian paired with a branch state.
  void validate(const SystemState& state) const;
};

struct CollapseEvent {
  double time = 0.0;
  int particle = 0;
  double center = 0.0;
  std::vector<double> pre_weights;
  std::vector<double> post_weights;
};

struct Snapshot {
  double time;
  SystemState state;
};

struct RunOptions {
  /// Sorted times in [0, total_time] at which the state is recorded.
  std::vector<double> snapshot_times;
  /// Stop after this many collapses (0: no limit).
  std::size_t max_events = 0;
  /// For grid states, event weights are (mass in region, mass outside),
  /// averaged over particles. Without a region they are left empty.
  std::optional<Region> summary_region;
};

struct TrajectoryRecord {
  std::vector<CollapseEvent> events;
  std::vector<Snapshot> snapshots;
  SystemState final_state;
  double end_time = 0.0;
  /// Set when the run was aborted by a numerical error.
  std::optional<std::string> failure;

  bool ok() const { return !failure.has_value(); }
};

/// Branch weights for BranchState; region masses (or nothing) for grid states.
std::vector<double> weight_summary(const SystemState& state, const std::optional<Region>& region);

SystemState apply_collapse(const SystemState& state, int particle, double center, double sigma);
double sample_collapse_center(const SystemState& state, int particle, double sigma, RngStream& rng);

/// Jump process: exponential waits at rate N*lambda_eff, a uniformly chosen
/// particle, a center drawn from ||L_{k,X} psi||^2, then the collapse, with
/// unitary evolution in between. Deterministic given the stream.
TrajectoryRecord run_trajectory(const SystemState& initial, const GrwParams& params, RngStream& rng,
                                const RunOptions& options = {});

/// Snapshot recorded at `time` (exact match within 1e-12); throws if absent.
const SystemState& state_at(const TrajectoryRecord& record, double time);

}  // namespace grw
