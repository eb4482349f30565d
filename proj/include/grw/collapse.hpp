#pragma once

#include "grw/branch_state.hpp"
#include "grw/errors.hpp"
#include "grw/grid_wavefunction.hpp"
#include "grw/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace grw {

/// Smallest admissible ||L_{k,X} psi||; below it a center is treated as having
/// zero probability.
inline constexpr double kCollapseNormFloor = 1e-150;

/// Collapse operators act by multiplying psi with
///   g(u) = (pi sigma^2)^(-1/4) exp(-u^2 / (2 sigma^2)),  u = x_k - X,
/// so that g^2 is a unit-mass Gaussian of variance sigma^2/2 and the integral
/// of L^2 over X is the identity.
template <typename Scalar>
Scalar collapse_profile(Scalar u, Scalar sigma) {
  return std::pow(std::numbers::pi_v<Scalar> * sigma * sigma, Scalar(-0.25)) *
         std::exp(-u * u / (Scalar(2) * sigma * sigma));
}

/// Waiting time to the next collapse anywhere in an N-particle system.
double sample_waiting_time(int num_particles, double lambda_eff, RngStream& rng);

/// Density of the collapse center X for particle k, tabulated on the grid axis:
/// p(X) = ||L_{k,X} psi||^2 = (marginal of k) convolved with N(0, sigma^2/2).
/// The kernel is cut where it falls below 1e-20 of its peak.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> collapse_center_density(const GridWaveFunction<Scalar>& psi, int particle,
                                                                 Scalar sigma) {
  if (!(sigma > Scalar(0))) throw std::invalid_argument("collapse_center_density: sigma must be > 0");
  const auto rho = marginal_density(psi, particle);
  const Eigen::Index points = rho.size();
  const Scalar dx = psi.spec().spacing();

  const Scalar cutoff = sigma * std::sqrt(Scalar(46));  // exp(-46) ~ 1e-20
  const Eigen::Index reach = std::min<Eigen::Index>(points - 1, static_cast<Eigen::Index>(std::ceil(cutoff / dx)));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kernel(reach + 1);
  const Scalar norm = Scalar(1) / (std::sqrt(std::numbers::pi_v<Scalar>) * sigma);
  for (Eigen::Index d = 0; d <= reach; ++d) {
    const Scalar u = Scalar(d) * dx;
    kernel(d) = norm * std::exp(-u * u / (sigma * sigma));
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(points);
  for (Eigen::Index j = 0; j < points; ++j) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, j - reach);
    const Eigen::Index hi = std::min<Eigen::Index>(points - 1, j + reach);
    Scalar acc = Scalar(0);
    for (Eigen::Index i = lo; i <= hi; ++i) acc += rho(i) * kernel(std::abs(i - j));
    p(j) = acc * dx;
  }
  return p;
}

/// psi -> L_{k,X} psi / ||L_{k,X} psi||. Throws NumericalError when the
/// collapse norm is below kCollapseNormFloor.
template <typename Scalar>
GridWaveFunction<Scalar> apply_collapse_grid(const GridWaveFunction<Scalar>& psi, int particle, Scalar center,
                                             Scalar sigma) {
  const auto& spec = psi.spec();
  if (particle < 0 || particle >= spec.num_particles)
    throw std::out_of_range("apply_collapse_grid: particle index out of range");
  if (!(sigma > Scalar(0))) throw std::invalid_argument("apply_collapse_grid: sigma must be > 0");
  if (!std::isfinite(double(center))) throw NumericalError("zero-probability collapse: non-finite center");

  const Eigen::Index points = spec.points_per_axis;
  const Eigen::Index stride = spec.stride(particle);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> factor(points);
  for (Eigen::Index j = 0; j < points; ++j) factor(j) = collapse_profile(spec.coordinate(j) - center, sigma);

  GridWaveFunction<Scalar> out = psi;
  auto& a = out.amplitudes();
  for (Eigen::Index flat = 0; flat < a.size(); ++flat) a(flat) *= factor((flat / stride) % points);

  const Scalar n2 = norm_squared(out);
  if (!(std::sqrt(n2) > Scalar(kCollapseNormFloor)))
    throw NumericalError("zero-probability collapse: post-collapse norm underflows");
  a /= std::sqrt(n2);
  return out;
}

/// Inverse-CDF sampler over the tabulated center density of one state. X is
/// uniform inside the selected grid cell.
template <typename Scalar>
class GridCenterSampler {
 public:
  GridCenterSampler(const GridWaveFunction<Scalar>& psi, int particle, Scalar sigma)
      : spec_(psi.spec()), cdf_(collapse_center_density(psi, particle, sigma)) {
    Scalar running = Scalar(0);
    for (Eigen::Index j = 0; j < cdf_.size(); ++j) cdf_(j) = (running += cdf_(j));
    if (!(running > Scalar(0))) throw NumericalError("collapse center density vanishes on the grid");
  }

  Scalar operator()(RngStream& rng) const {
    const Scalar u = Scalar(rng.uniform()) * cdf_(cdf_.size() - 1);
    const auto* first = cdf_.data();
    const auto* hit = std::upper_bound(first, first + cdf_.size(), u);
    const Eigen::Index cell = std::min<Eigen::Index>(hit - first, cdf_.size() - 1);
    return spec_.coordinate(cell) + (Scalar(rng.uniform()) - Scalar(0.5)) * spec_.spacing();
  }

 private:
  GridSpec<Scalar> spec_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cdf_;
};

template <typename Scalar>
Scalar sample_collapse_center(const GridWaveFunction<Scalar>& psi, int particle, Scalar sigma, RngStream& rng) {
  return GridCenterSampler<Scalar>(psi, particle, sigma)(rng);
}

/// Closed-form collapse for point anchors: w_i' ∝ w_i exp(-(a_{i,k} - X)^2 / sigma^2).
/// Evaluated in log space, so a positive weight never becomes exactly zero.
BranchState branch_collapse_update(const BranchState& state, int particle, double center, double sigma);

/// Draws X from sum_i w_i N(a_{i,k}, sigma^2/2).
double sample_collapse_center(const BranchState& state, int particle, double sigma, RngStream& rng);

}  // namespace grw
