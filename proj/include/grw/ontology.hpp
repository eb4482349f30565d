#pragma once

#include "grw/branch_state.hpp"
#include "grw/grid_wavefunction.hpp"
#include "grw/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace grw {

/// One collapse seen as a space-time point of matter.
struct Flash {
  double time = 0.0;
  double position = 0.0;
  int particle = 0;
};

/// Uniform spatial axis for rasterized fields.
struct SpatialGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  Eigen::Index points = 2;

  double spacing() const { return (x_max - x_min) / double(points - 1); }
  double coordinate(Eigen::Index j) const { return x_min + double(j) * spacing(); }
};

/// Mass per unit length on a 1-D grid.
struct MatterDensityField {
  SpatialGrid grid;
  Eigen::VectorXd values;
  double time = 0.0;
  std::vector<double> masses;

  double total_mass() const;
  double integral() const { return values.sum() * grid.spacing(); }
};

/// One flash per collapse event, same order.
std::vector<Flash> flashes_of(const TrajectoryRecord& trajectory);

/// m_k = 1/N for every particle.
std::vector<double> equal_masses(int num_particles);

/// m(x) = sum_k m_k * (marginal of |psi|^2 in particle k), on the grid of psi.
MatterDensityField matter_density(const GridWaveFunctiond& psi, const std::vector<double>& masses, double time = 0.0);

/// m(x) = sum_i w_i sum_k m_k delta(x - a_{i,k}), each anchor a one-cell spike
/// on `grid`. Throws if more than 1e-6 of the mass falls off the grid.
MatterDensityField matter_density(const BranchState& state, const std::vector<double>& masses,
                                  const SpatialGrid& grid, double time = 0.0);

/// Integral of m over the grid points inside `region`, divided by the total.
double mass_fraction_in_region(const MatterDensityField& field, const Region& region);

/// Same quantity for point anchors, without rasterizing.
double mass_fraction_in_region(const BranchState& state, const std::vector<double>& masses, const Region& region);

struct TimeWindow {
  double begin;  // inclusive
  double end;    // exclusive
};

struct FlashFraction {
  std::optional<double> fraction;  // empty when no flash matched
  std::size_t count = 0;
};

/// Fraction of the flashes in `window` (optionally of one particle) whose
/// position lies in `region`.
FlashFraction flash_fraction_in_region(const std::vector<Flash>& flashes, const Region& region, TimeWindow window,
                                       std::optional<int> particle = std::nullopt);

/// The wavefunction-only reading: branch labels and weights, nothing spatial.
std::vector<std::pair<std::string, double>> grw0_view(const BranchState& state);

}  // namespace grw
