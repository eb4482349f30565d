#include "grw/trajectory.hpp"

#include "grw/collapse.hpp"
#include "grw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grw {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double grid_mass_in_region(const GridWaveFunctiond& psi, const Region& region) {
  const auto& spec = psi.spec();
  double inside = 0.0;
  for (int k = 0; k < spec.num_particles; ++k) {
    const Eigen::VectorXd rho = marginal_density(psi, k);
    for (Eigen::Index j = 0; j < rho.size(); ++j)
      if (region.contains(spec.coordinate(j))) inside += rho(j);
  }
  return inside * spec.spacing() / spec.num_particles;
}

SystemState evolve(const SystemState& state, double dt, const Hamiltonian& h) {
  if (dt <= 0.0 || std::holds_alternative<ZeroHamiltonian>(h)) return state;
  return evolve_unitary(std::get<GridWaveFunctiond>(state), dt, h);
}

}  // namespace

int num_particles(const SystemState& state) {
  return std::visit([](const auto& s) { return s.num_particles(); }, state);
}

void GrwParams::validate(const SystemState& state) const {
  if (!(lambda_eff > 0.0) || !std::isfinite(lambda_eff)) throw std::invalid_argument("GrwParams: lambda_eff must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("GrwParams: sigma must be > 0");
  if (!(total_time > 0.0) || !std::isfinite(total_time)) throw std::invalid_argument("GrwParams: total_time must be > 0");
  if (std::holds_alternative<FreeParticleHamiltonian>(hamiltonian) && std::holds_alternative<BranchState>(state))
    throw std::invalid_argument("GrwParams: free-particle Hamiltonian requires a grid wavefunction");
}

std::vector<double> weight_summary(const SystemState& state, const std::optional<Region>& region) {
  return std::visit(Overloaded{[](const BranchState& s) {
                                 const Eigen::VectorXd w = s.weights();
                                 return std::vector<double>(w.data(), w.data() + w.size());
                               },
                               [&](const GridWaveFunctiond& psi) {
                                 if (!region) return std::vector<double>{};
                                 const double inside = grid_mass_in_region(psi, *region);
                                 return std::vector<double>{inside, 1.0 - inside};
                               }},
                    state);
}

SystemState apply_collapse(const SystemState& state, int particle, double center, double sigma) {
  return std::visit(Overloaded{[&](const BranchState& s) -> SystemState {
                                 return branch_collapse_update(s, particle, center, sigma);
                               },
                               [&](const GridWaveFunctiond& psi) -> SystemState {
                                 return apply_collapse_grid(psi, particle, center, sigma);
                               }},
                    state);
}

double sample_collapse_center(const SystemState& state, int particle, double sigma, RngStream& rng) {
  return std::visit([&](const auto& s) { return sample_collapse_center(s, particle, sigma, rng); }, state);
}

TrajectoryRecord run_trajectory(const SystemState& initial, const GrwParams& params, RngStream& rng,
                                const RunOptions& options) {
  params.validate(initial);
  if (!std::is_sorted(options.snapshot_times.begin(), options.snapshot_times.end()))
    throw std::invalid_argument("run_trajectory: snapshot times must be sorted");
  for (double t : options.snapshot_times)
    if (t < 0.0 || t > params.total_time)
      throw std::invalid_argument("run_trajectory: snapshot time outside [0, total_time]");

  const int n = num_particles(initial);
  TrajectoryRecord record{.events = {}, .snapshots = {}, .final_state = initial, .end_time = 0.0, .failure = {}};
  SystemState state = initial;
  double t = 0.0;
  std::size_t next_snapshot = 0;

  auto take_snapshots_until = [&](double limit) {
    while (next_snapshot < options.snapshot_times.size() && options.snapshot_times[next_snapshot] <= limit) {
      const double ts = options.snapshot_times[next_snapshot++];
      state = evolve(state, ts - t, params.hamiltonian);
      t = ts;
      record.snapshots.push_back({ts, state});
    }
  };

  try {
    while (true) {
      const double t_next = t + sample_waiting_time(n, params.lambda_eff, rng);
      if (t_next > params.total_time) {
        take_snapshots_until(params.total_time);
        state = evolve(state, params.total_time - t, params.hamiltonian);
        t = params.total_time;
        break;
      }
      take_snapshots_until(t_next);
      state = evolve(state, t_next - t, params.hamiltonian);
      t = t_next;

      const int particle = static_cast<int>(std::min<double>(n - 1, std::floor(rng.uniform() * n)));
      const double center = sample_collapse_center(state, particle, params.sigma, rng);
      CollapseEvent event{.time = t, .particle = particle, .center = center,
                          .pre_weights = weight_summary(state, options.summary_region), .post_weights = {}};
      state = apply_collapse(state, particle, center, params.sigma);
      event.post_weights = weight_summary(state, options.summary_region);
      record.events.push_back(std::move(event));

      if (options.max_events > 0 && record.events.size() >= options.max_events) break;
    }
  } catch (const NumericalError& e) {
    record.failure = e.what();
  }
  record.final_state = std::move(state);
  record.end_time = t;
  return record;
}

const SystemState& state_at(const TrajectoryRecord& record, double time) {
  for (const auto& s : record.snapshots)
    if (std::abs(s.time - time) <= 1e-12) return s.state;
  throw std::out_of_range("state_at: no snapshot at requested time");
}

}  // namespace grw
