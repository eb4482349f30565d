#pragma once

#include "grw/branch_state.hpp"
#include "grw/ontology.hpp"
#include "grw/rng.hpp"
#include "grw/trajectory.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grw {

enum class ScenarioKind { Cat, Tail, Marbles };
enum class Ontology { GRW0, GRWf, GRWm };
enum class History { CollapsedPast, FreshPreparation };
enum class Backend { Branch, Grid };
enum class Verdict { Inside, Outside, Partial, Undefined };

std::string_view to_string(ScenarioKind kind);
std::string_view to_string(Ontology ontology);
std::string_view to_string(History history);
std::string_view to_string(Backend backend);
std::string_view to_string(Verdict verdict);

/// Everything needed to build and run one paradox experiment. Branch 0 is the
/// "inside" (for the cat: "dead") branch with weight c1_sq and lives at
/// anchor_inside; branch 1 sits at anchor_outside.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Cat;
  Backend backend = Backend::Branch;
  double c1_sq = 0.5;
  int n_marbles = 1;
  int particles = 1;  // particles per system
  Region box{-5.0, 5.0};
  double anchor_inside = 0.0;
  double anchor_outside = 10.0;
  Ontology ontology = Ontology::GRWm;
  History history = History::FreshPreparation;

  double lambda_eff = 1.0;
  double sigma = 1.0;
  double total_time = 50.0;
  bool free_hamiltonian = false;
  double particle_mass = 1.0;  // for the free Hamiltonian
  std::vector<double> masses;  // matter-density weights; empty means equal

  double theta_m = 0.5;
  double theta_f = 0.99;
  std::optional<double> window;           // GRWf window length; default 100/(N lambda)
  std::optional<double> martingale_time;  // default min(T, 20/(N lambda))
  std::optional<double> sample_interval;  // resurrection sampling; default 1/(N lambda)
  std::vector<double> snapshot_times;     // extra matter-density snapshots

  // Grid backend.
  double grid_x_min = -10.0;
  double grid_x_max = 20.0;
  Eigen::Index grid_points = 512;
  double packet_width = 0.2;

  // Rasterization axis for branch-model density output; default spans the
  // anchors and the box with 5 sigma margin.
  std::optional<SpatialGrid> density_grid;

  // Statistics.
  double z_max = 4.0;
  double p_min = 0.001;
  std::size_t first_window_flashes = 100;
  std::size_t oracle_sequences = 1'000'000;

  double collapse_rate() const { return double(particles) * lambda_eff; }
  double window_length() const;
  double martingale_at() const;
  double sampling_interval() const;
  std::vector<double> matter_masses() const;
  SpatialGrid output_grid() const;
  std::string inside_label() const;
  std::string outside_label() const;
  GrwParams grw_params() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

struct Classification {
  Verdict verdict = Verdict::Undefined;
  double evidence = 0.0;  // the fraction the verdict was based on
  Ontology ontology = Ontology::GRWm;
};

/// Inside iff fraction >= theta (and > 1/2); Outside iff fraction <= 1 - theta
/// (and < 1/2); otherwise Partial. theta must lie in [0.5, 1].
Verdict threshold_verdict(double fraction, double theta);

Classification classify_grwm(const MatterDensityField& field, const Region& box, double theta_m);
Classification classify_grwm(double mass_fraction_inside, double theta_m);
Classification classify_grwf(const std::vector<Flash>& flashes, const Region& box, TimeWindow window, double theta_f);
/// Reads only branch weights: the weight of `inside_label` against theta.
Classification classify_grw0(const std::vector<std::pair<std::string, double>>& weights,
                             const std::string& inside_label, double theta);

/// One system's starting point: its state and any flashes it produced before t = 0.
struct SystemSetup {
  SystemState state;
  std::vector<Flash> prior_flashes;
};

struct ScenarioSetup {
  ScenarioConfig config;
  GrwParams params;
  RunOptions options;
  std::vector<SystemSetup> systems;  // n_marbles entries
};

SystemState make_initial_state(const ScenarioConfig& config);

/// CollapsedPast: a Poisson history over [-window, 0) drawn from branch 0 and
/// restricted to the box. FreshPreparation: none.
std::vector<Flash> seed_prior_flashes(const ScenarioConfig& config, RngStream& rng);

/// 0, interval, 2*interval, ... up to and including total_time.
std::vector<double> resurrection_sampling_times(const ScenarioConfig& config);

/// Snapshot schedule and event summaries every run of this config uses.
RunOptions trajectory_plan(const ScenarioConfig& config);

ScenarioSetup build_scenario(const ScenarioConfig& config, RngStream& rng);

/// Verdict of a trajectory at a given time.
using Classifier = std::function<Classification(const TrajectoryRecord&, double)>;

/// Classifier for the config's ontology. GRWm and GRW0 read the snapshot at
/// the requested time; GRWf uses flashes (prior ones included) in
/// [t - window, t).
Classifier make_classifier(const ScenarioConfig& config, std::vector<Flash> prior_flashes);

struct VerdictTransition {
  double time;
  Verdict from;
  Verdict to;
};

/// Inside <-> Outside changes between consecutive definite verdicts
/// (Partial and Undefined samples are skipped over).
std::vector<VerdictTransition> detect_resurrection(const TrajectoryRecord& trajectory, const Classifier& classifier,
                                                   std::span<const double> sampling_times);

struct CensusCounts {
  std::size_t inside = 0;
  std::size_t outside = 0;
  std::size_t partial = 0;
  std::size_t undefined = 0;

  std::size_t total() const { return inside + outside + partial + undefined; }
};

/// Tally of per-marble verdicts. All must come from the same ontology.
CensusCounts marble_census(std::span<const Classification> verdicts);

}  // namespace grw
