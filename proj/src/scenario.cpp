#include "grw/scenario.hpp"

#include "grw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace grw {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Cat: return "cat";
    case ScenarioKind::Tail: return "tail";
    case ScenarioKind::Marbles: return "marbles";
  }
  return "?";
}

std::string_view to_string(Ontology ontology) {
  switch (ontology) {
    case Ontology::GRW0: return "grw0";
    case Ontology::GRWf: return "grwf";
    case Ontology::GRWm: return "grwm";
  }
  return "?";
}

std::string_view to_string(History history) {
  switch (history) {
    case History::CollapsedPast: return "collapsed_past";
    case History::FreshPreparation: return "fresh_preparation";
  }
  return "?";
}

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::Branch: return "branch";
    case Backend::Grid: return "grid";
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Inside: return "inside";
    case Verdict::Outside: return "outside";
    case Verdict::Partial: return "partial";
    case Verdict::Undefined: return "undefined";
  }
  return "?";
}

double ScenarioConfig::window_length() const { return window.value_or(100.0 / collapse_rate()); }

double ScenarioConfig::martingale_at() const {
  return martingale_time.value_or(std::min(total_time, 20.0 / collapse_rate()));
}

double ScenarioConfig::sampling_interval() const { return sample_interval.value_or(1.0 / collapse_rate()); }

std::vector<double> ScenarioConfig::matter_masses() const {
  if (masses.empty()) return equal_masses(particles);
  return masses;
}

SpatialGrid ScenarioConfig::output_grid() const {
  if (density_grid) return *density_grid;
  const double lo = std::min({anchor_inside, anchor_outside, box.lower()}) - 5.0 * sigma;
  const double hi = std::max({anchor_inside, anchor_outside, box.upper()}) + 5.0 * sigma;
  return SpatialGrid{lo, hi, 1001};
}

std::string ScenarioConfig::inside_label() const { return kind == ScenarioKind::Cat ? "dead" : "inside"; }
std::string ScenarioConfig::outside_label() const { return kind == ScenarioKind::Cat ? "alive" : "outside"; }

GrwParams ScenarioConfig::grw_params() const {
  GrwParams p{.lambda_eff = lambda_eff, .sigma = sigma, .total_time = total_time, .hamiltonian = ZeroHamiltonian{}};
  if (free_hamiltonian) p.hamiltonian = FreeParticleHamiltonian{{particle_mass}};
  return p;
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c1_sq > 0.0 && c1_sq < 1.0, "c1_sq must lie in (0, 1)");
  require(n_marbles >= 1, "n_marbles must be >= 1");
  require(particles >= 1, "particles must be >= 1");
  require(lambda_eff > 0.0 && std::isfinite(lambda_eff), "lambda_eff must be > 0");
  require(sigma > 0.0 && std::isfinite(sigma), "sigma must be > 0");
  require(total_time > 0.0 && std::isfinite(total_time), "total_time must be > 0");
  require(theta_m >= 0.5 && theta_m < 1.0, "theta_m must lie in [0.5, 1)");
  require(theta_f > 0.5 && theta_f <= 1.0, "theta_f must lie in (0.5, 1]");
  require(box.contains(anchor_inside), "box must contain anchor_inside");
  require(!box.contains(anchor_outside), "box must not contain anchor_outside");
  require(!window || *window > 0.0, "window must be > 0");
  require(!martingale_time || (*martingale_time >= 0.0 && *martingale_time <= total_time),
          "martingale_time must lie in [0, total_time]");
  require(!sample_interval || *sample_interval > 0.0, "sample_interval must be > 0");
  for (double t : snapshot_times) require(t >= 0.0 && t <= total_time, "snapshot_times must lie in [0, total_time]");
  require(masses.empty() || static_cast<int>(masses.size()) == particles, "masses needs one entry per particle");
  for (double m : masses) require(m > 0.0, "masses must be > 0");
  require(particle_mass > 0.0, "particle_mass must be > 0");
  require(z_max > 0.0, "z_max must be > 0");
  require(p_min > 0.0 && p_min < 1.0, "p_min must lie in (0, 1)");
  require(first_window_flashes >= 1, "first_window_flashes must be >= 1");
  require(oracle_sequences >= 1000, "oracle_sequences must be >= 1000");
  if (density_grid)
    require(density_grid->x_min < density_grid->x_max && density_grid->points >= 2, "density grid is invalid");

  if (backend == Backend::Grid) {
    require(n_marbles == 1, "the grid backend supports a single system (n_marbles = 1) only");
    require(particles <= kMaxGridParticles, "the grid backend supports at most 3 particles");
    require(grid_x_min < grid_x_max && grid_points >= 2, "grid axis is invalid");
    require(anchor_inside >= grid_x_min && anchor_inside <= grid_x_max && anchor_outside >= grid_x_min &&
                anchor_outside <= grid_x_max,
            "anchors must lie on the grid");
    require(packet_width >= 2.0 * (grid_x_max - grid_x_min) / double(grid_points - 1),
            "packet_width below 2 grid cells");
  } else {
    require(!free_hamiltonian, "the free Hamiltonian requires the grid backend");
  }
}

Verdict threshold_verdict(double fraction, double theta) {
  if (!(theta >= 0.5 && theta <= 1.0)) throw std::invalid_argument("threshold_verdict: theta must lie in [0.5, 1]");
  if (fraction >= theta && fraction > 0.5) return Verdict::Inside;
  if (fraction <= 1.0 - theta && fraction < 0.5) return Verdict::Outside;
  return Verdict::Partial;
}

Classification classify_grwm(double mass_fraction_inside, double theta_m) {
  return {threshold_verdict(mass_fraction_inside, theta_m), mass_fraction_inside, Ontology::GRWm};
}

Classification classify_grwm(const MatterDensityField& field, const Region& box, double theta_m) {
  if (!(field.integral() > 0.0)) return {Verdict::Undefined, 0.0, Ontology::GRWm};
  return classify_grwm(mass_fraction_in_region(field, box), theta_m);
}

Classification classify_grwf(const std::vector<Flash>& flashes, const Region& box, TimeWindow window, double theta_f) {
  const FlashFraction ff = flash_fraction_in_region(flashes, box, window);
  if (!ff.fraction) return {Verdict::Undefined, 0.0, Ontology::GRWf};
  return {threshold_verdict(*ff.fraction, theta_f), *ff.fraction, Ontology::GRWf};
}

Classification classify_grw0(const std::vector<std::pair<std::string, double>>& weights,
                             const std::string& inside_label, double theta) {
  for (const auto& [label, w] : weights)
    if (label == inside_label) return {threshold_verdict(w, theta), w, Ontology::GRW0};
  return {Verdict::Undefined, 0.0, Ontology::GRW0};
}

SystemState make_initial_state(const ScenarioConfig& config) {
  config.validate();
  const int n = config.particles;
  if (config.backend == Backend::Grid) {
    GridSpecd spec{config.grid_x_min, config.grid_x_max, config.grid_points, n};
    std::vector<GaussianPacketd> packets{
        {std::vector<double>(static_cast<std::size_t>(n), config.anchor_inside), config.packet_width,
         std::sqrt(config.c1_sq)},
        {std::vector<double>(static_cast<std::size_t>(n), config.anchor_outside), config.packet_width,
         std::sqrt(1.0 - config.c1_sq)}};
    return make_grid_wavefunction(spec, packets);
  }
  Eigen::MatrixXd anchors(2, n);
  anchors.row(0).setConstant(config.anchor_inside);
  anchors.row(1).setConstant(config.anchor_outside);
  return BranchState({config.c1_sq, 1.0 - config.c1_sq}, anchors, {config.inside_label(), config.outside_label()});
}

std::vector<Flash> seed_prior_flashes(const ScenarioConfig& config, RngStream& rng) {
  std::vector<Flash> flashes;
  if (config.history != History::CollapsedPast) return flashes;
  const double window = config.window_length();
  const double sd = config.sigma / std::sqrt(2.0);
  double t = -window;
  while (true) {
    t += rng.exponential(config.collapse_rate());
    if (t >= 0.0) break;
    const int particle = static_cast<int>(std::min<double>(config.particles - 1, std::floor(rng.uniform() * config.particles)));
    double x = rng.normal(config.anchor_inside, sd);
    for (int tries = 0; !config.box.contains(x); ++tries) {
      if (tries > 10000) throw ConfigError("box too narrow to seed a collapsed-past history");
      x = rng.normal(config.anchor_inside, sd);
    }
    flashes.push_back({t, x, particle});
  }
  return flashes;
}

std::vector<double> resurrection_sampling_times(const ScenarioConfig& config) {
  const double dt = config.sampling_interval();
  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = double(k) * dt;
    if (t >= config.total_time * (1.0 - 1e-12)) break;
    times.push_back(t);
  }
  times.push_back(config.total_time);
  return times;
}

RunOptions trajectory_plan(const ScenarioConfig& config) {
  std::vector<double> times{0.0, config.martingale_at(), config.total_time};
  times.insert(times.end(), config.snapshot_times.begin(), config.snapshot_times.end());
  if (config.kind == ScenarioKind::Tail) {
    const auto sampling = resurrection_sampling_times(config);
    times.insert(times.end(), sampling.begin(), sampling.end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
              times.end());
  RunOptions options;
  options.snapshot_times = std::move(times);
  if (config.backend == Backend::Grid) options.summary_region = config.box;
  return options;
}

ScenarioSetup build_scenario(const ScenarioConfig& config, RngStream& rng) {
  config.validate();
  ScenarioSetup setup{.config = config, .params = config.grw_params(), .options = trajectory_plan(config), .systems = {}};
  const SystemState initial = make_initial_state(config);
  for (int m = 0; m < config.n_marbles; ++m) setup.systems.push_back({initial, seed_prior_flashes(config, rng)});
  return setup;
}

namespace {

double grwm_fraction(const ScenarioConfig& config, const SystemState& state) {
  if (const auto* branch = std::get_if<BranchState>(&state))
    return mass_fraction_in_region(*branch, config.matter_masses(), config.box);
  const auto& psi = std::get<GridWaveFunctiond>(state);
  return mass_fraction_in_region(matter_density(psi, config.matter_masses()), config.box);
}

std::vector<std::pair<std::string, double>> grw0_weights(const ScenarioConfig& config, const SystemState& state) {
  if (const auto* branch = std::get_if<BranchState>(&state)) return grw0_view(*branch);
  const auto w = weight_summary(state, config.box);
  return {{config.inside_label(), w[0]}, {config.outside_label(), w[1]}};
}

}  // namespace

Classifier make_classifier(const ScenarioConfig& config, std::vector<Flash> prior_flashes) {
  switch (config.ontology) {
    case Ontology::GRWm:
      return [config](const TrajectoryRecord& record, double t) {
        return classify_grwm(grwm_fraction(config, state_at(record, t)), config.theta_m);
      };
    case Ontology::GRW0:
      return [config](const TrajectoryRecord& record, double t) {
        return classify_grw0(grw0_weights(config, state_at(record, t)), config.inside_label(), config.theta_m);
      };
    case Ontology::GRWf:
      break;
  }
  return [config, prior = std::move(prior_flashes)](const TrajectoryRecord& record, double t) {
    std::vector<Flash> flashes = prior;
    const auto own = flashes_of(record);
    flashes.insert(flashes.end(), own.begin(), own.end());
    const double w = config.window_length();
    return classify_grwf(flashes, config.box, {t - w, t}, config.theta_f);
  };
}

std::vector<VerdictTransition> detect_resurrection(const TrajectoryRecord& trajectory, const Classifier& classifier,
                                                   std::span<const double> sampling_times) {
  if (sampling_times.size() < 2) throw std::invalid_argument("detect_resurrection: need at least two sampling times");
  std::vector<VerdictTransition> transitions;
  std::optional<Verdict> last;
  for (double t : sampling_times) {
    const Verdict v = classifier(trajectory, t).verdict;
    if (v != Verdict::Inside && v != Verdict::Outside) continue;
    if (last && *last != v) transitions.push_back({t, *last, v});
    last = v;
  }
  return transitions;
}

CensusCounts marble_census(std::span<const Classification> verdicts) {
  CensusCounts counts;
  for (const auto& c : verdicts) {
    if (c.ontology != verdicts.front().ontology) throw std::invalid_argument("marble_census: mixed ontologies");
    switch (c.verdict) {
      case Verdict::Inside: ++counts.inside; break;
      case Verdict::Outside: ++counts.outside; break;
      case Verdict::Partial: ++counts.partial; break;
      case Verdict::Undefined: ++counts.undefined; break;
    }
  }
  return counts;
}

}  // namespace grw
