#include "grw/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace grw {

namespace {

void check_masses(const std::vector<double>& masses, int num_particles) {
  if (static_cast<int>(masses.size()) != num_particles)
    throw std::invalid_argument("matter_density: need one mass per particle");
  for (double m : masses)
    if (!(m > 0.0)) throw std::invalid_argument("matter_density: masses must be > 0");
}

void check_field(const MatterDensityField& field) {
  if ((field.values.array() < 0.0).any()) throw std::logic_error("matter density is negative");
  const double total = field.total_mass();
  if (std::abs(field.integral() - total) > 1e-9 * std::max(1.0, total))
    throw std::logic_error("matter density does not integrate to the total mass");
}

}  // namespace

double MatterDensityField::total_mass() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

std::vector<Flash> flashes_of(const TrajectoryRecord& trajectory) {
  std::vector<Flash> flashes;
  flashes.reserve(trajectory.events.size());
  for (const auto& e : trajectory.events) flashes.push_back({e.time, e.center, e.particle});
  return flashes;
}

std::vector<double> equal_masses(int num_particles) {
  if (num_particles < 1) throw std::invalid_argument("equal_masses: need N >= 1");
  return std::vector<double>(static_cast<std::size_t>(num_particles), 1.0 / num_particles);
}

MatterDensityField matter_density(const GridWaveFunctiond& psi, const std::vector<double>& masses, double time) {
  check_masses(masses, psi.num_particles());
  const auto& spec = psi.spec();
  MatterDensityField field{.grid = {spec.x_min, spec.x_max, spec.points_per_axis},
                           .values = Eigen::VectorXd::Zero(spec.points_per_axis),
                           .time = time,
                           .masses = masses};
  // The marginals integrate to ||psi||^2; dividing it out keeps the total
  // mass exact for a state normalized only to rounding.
  const double n2 = norm_squared(psi);
  for (int k = 0; k < psi.num_particles(); ++k)
    field.values += (masses[static_cast<std::size_t>(k)] / n2) * marginal_density(psi, k);
  check_field(field);
  return field;
}

MatterDensityField matter_density(const BranchState& state, const std::vector<double>& masses,
                                  const SpatialGrid& grid, double time) {
  check_masses(masses, state.num_particles());
  if (!(grid.x_min < grid.x_max) || grid.points < 2) throw std::invalid_argument("matter_density: invalid grid");
  const double dx = grid.spacing();
  MatterDensityField field{.grid = grid, .values = Eigen::VectorXd::Zero(grid.points), .time = time, .masses = masses};

  const Eigen::VectorXd w = state.weights();
  const double total = field.total_mass();
  double covered = 0.0;
  for (Eigen::Index i = 0; i < state.num_branches(); ++i) {
    for (int k = 0; k < state.num_particles(); ++k) {
      const double cell = std::round((state.anchors()(i, k) - grid.x_min) / dx);
      if (cell < 0.0 || cell > double(grid.points - 1)) continue;
      const double mass = w(i) * masses[static_cast<std::size_t>(k)];
      field.values(static_cast<Eigen::Index>(cell)) += mass / dx;
      covered += mass;
    }
  }
  if (covered < (1.0 - 1e-6) * total) throw std::invalid_argument("matter_density: grid does not cover the matter");
  // Weights are normalized only to rounding; rescale to the exact total.
  field.values *= total / covered;
  check_field(field);
  return field;
}

double mass_fraction_in_region(const MatterDensityField& field, const Region& region) {
  const double total = field.integral();
  if (!(total > 0.0)) throw std::invalid_argument("mass_fraction_in_region: total mass is zero");
  double inside = 0.0;
  for (Eigen::Index j = 0; j < field.values.size(); ++j)
    if (region.contains(field.grid.coordinate(j))) inside += field.values(j);
  return std::clamp(inside * field.grid.spacing() / total, 0.0, 1.0);
}

double mass_fraction_in_region(const BranchState& state, const std::vector<double>& masses, const Region& region) {
  check_masses(masses, state.num_particles());
  const Eigen::VectorXd w = state.weights();
  double inside = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < state.num_branches(); ++i) {
    for (int k = 0; k < state.num_particles(); ++k) {
      const double mass = w(i) * masses[static_cast<std::size_t>(k)];
      total += mass;
      if (region.contains(state.anchors()(i, k))) inside += mass;
    }
  }
  return std::clamp(inside / total, 0.0, 1.0);
}

FlashFraction flash_fraction_in_region(const std::vector<Flash>& flashes, const Region& region, TimeWindow window,
                                       std::optional<int> particle) {
  if (!(window.begin < window.end)) throw std::invalid_argument("flash_fraction_in_region: empty time window");
  std::size_t count = 0;
  std::size_t inside = 0;
  for (const auto& f : flashes) {
    if (f.time < window.begin || f.time >= window.end) continue;
    if (particle && f.particle != *particle) continue;
    ++count;
    if (region.contains(f.position)) ++inside;
  }
  FlashFraction out;
  out.count = count;
  if (count > 0) out.fraction = double(inside) / double(count);
  return out;
}

std::vector<std::pair<std::string, double>> grw0_view(const BranchState& state) { return branch_weights(state); }

}  // namespace grw
