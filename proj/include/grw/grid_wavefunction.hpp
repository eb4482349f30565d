#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grw {

/// Particle count above which the configuration grid is not offered; larger
/// systems go through BranchState.
inline constexpr int kMaxGridParticles = 3;

/// Upper bound on points_per_axis^N.
inline constexpr double kMaxConfigurationPoints = 1u << 26;

/// Uniform 1-D axis shared by every particle; the configuration grid is its
/// N-fold product. Both endpoints are grid points.
template <typename Scalar>
struct GridSpec {
  Scalar x_min = Scalar(-1);
  Scalar x_max = Scalar(1);
  Eigen::Index points_per_axis = 2;
  int num_particles = 1;

  Scalar spacing() const { return (x_max - x_min) / Scalar(points_per_axis - 1); }
  Scalar coordinate(Eigen::Index j) const { return x_min + Scalar(j) * spacing(); }
  Scalar cell_volume() const { return std::pow(spacing(), Scalar(num_particles)); }

  Eigen::Index total_points() const {
    Eigen::Index n = 1;
    for (int k = 0; k < num_particles; ++k) n *= points_per_axis;
    return n;
  }

  /// Flat-index stride of particle k (particle 0 varies fastest).
  Eigen::Index stride(int particle) const {
    Eigen::Index s = 1;
    for (int k = 0; k < particle; ++k) s *= points_per_axis;
    return s;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> axis() const {
    return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(points_per_axis, x_min, x_max);
  }

  void validate() const {
    if (!(x_min < x_max)) throw std::invalid_argument("GridSpec: x_min must be < x_max");
    if (points_per_axis < 2) throw std::invalid_argument("GridSpec: points_per_axis must be >= 2");
    if (num_particles < 1) throw std::invalid_argument("GridSpec: num_particles must be >= 1");
    if (num_particles > kMaxGridParticles)
      throw std::invalid_argument("GridSpec: at most " + std::to_string(kMaxGridParticles) +
                                  " particles on a configuration grid");
    if (double(num_particles) * std::log(double(points_per_axis)) > std::log(kMaxConfigurationPoints))
      throw std::invalid_argument("GridSpec: configuration grid too large");
  }
};

/// Product Gaussian packet. `width` is the standard deviation of |phi|^2 along
/// each coordinate; `centers` holds one position per particle.
template <typename Scalar>
struct GaussianPacket {
  std::vector<Scalar> centers;
  Scalar width = Scalar(1);
  std::complex<Scalar> coefficient{1, 0};
};

template <typename Scalar>
class GridWaveFunction {
 public:
  using RealScalar = Scalar;
  using Complex = std::complex<Scalar>;
  using AmplitudeVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
  using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridWaveFunction(GridSpec<Scalar> spec, AmplitudeVector amplitudes)
      : spec_(std::move(spec)), amplitudes_(std::move(amplitudes)) {
    spec_.validate();
    if (amplitudes_.size() != spec_.total_points())
      throw std::invalid_argument("GridWaveFunction: amplitude count does not match grid");
  }

  const GridSpec<Scalar>& spec() const { return spec_; }
  int num_particles() const { return spec_.num_particles; }
  Scalar cell_volume() const { return spec_.cell_volume(); }

  const AmplitudeVector& amplitudes() const { return amplitudes_; }
  AmplitudeVector& amplitudes() { return amplitudes_; }

 private:
  GridSpec<Scalar> spec_;
  AmplitudeVector amplitudes_;
};

using GridSpecd = GridSpec<double>;
using GaussianPacketd = GaussianPacket<double>;
using GridWaveFunctiond = GridWaveFunction<double>;

/// Riemann sum of |psi|^2 over the configuration grid.
template <typename Scalar>
Scalar norm_squared(const GridWaveFunction<Scalar>& psi) {
  return psi.amplitudes().squaredNorm() * psi.cell_volume();
}

template <typename Scalar>
GridWaveFunction<Scalar> normalized(GridWaveFunction<Scalar> psi) {
  const Scalar n2 = norm_squared(psi);
  if (!(n2 > Scalar(0)) || !std::isfinite(double(n2)))
    throw std::invalid_argument("normalized: state has zero or non-finite norm");
  psi.amplitudes() /= std::sqrt(n2);
  return psi;
}

/// Normalized superposition of product-Gaussian packets sampled on the grid.
template <typename Scalar>
GridWaveFunction<Scalar> make_grid_wavefunction(const GridSpec<Scalar>& spec,
                                                std::span<const GaussianPacket<Scalar>> packets) {
  spec.validate();
  if (packets.empty()) throw std::invalid_argument("make_grid_wavefunction: empty packet list");

  const Scalar dx = spec.spacing();
  const Eigen::Index points = spec.points_per_axis;
  const int n = spec.num_particles;
  bool any_nonzero = false;
  for (const auto& p : packets) {
    if (static_cast<int>(p.centers.size()) != n)
      throw std::invalid_argument("make_grid_wavefunction: packet needs one center per particle");
    if (!(p.width > Scalar(0))) throw std::invalid_argument("make_grid_wavefunction: width must be > 0");
    if (p.width < Scalar(2) * dx)
      throw std::invalid_argument("make_grid_wavefunction: packet width below 2 grid cells");
    for (Scalar c : p.centers)
      if (c < spec.x_min || c > spec.x_max)
        throw std::invalid_argument("make_grid_wavefunction: packet center outside grid");
    if (p.coefficient != std::complex<Scalar>(0)) any_nonzero = true;
  }
  if (!any_nonzero) throw std::invalid_argument("make_grid_wavefunction: all coefficients are zero");

  const auto x = spec.axis();
  typename GridWaveFunction<Scalar>::AmplitudeVector amplitudes =
      GridWaveFunction<Scalar>::AmplitudeVector::Zero(spec.total_points());

  for (const auto& p : packets) {
    if (p.coefficient == std::complex<Scalar>(0)) continue;
    // phi_k(x) = (2 pi w^2)^(-1/4) exp(-(x - c)^2 / (4 w^2)), tabulated per axis.
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> factors;
    const Scalar prefactor = std::pow(Scalar(2) * std::numbers::pi_v<Scalar> * p.width * p.width, Scalar(-0.25));
    for (int k = 0; k < n; ++k)
      factors.push_back(prefactor *
                        (-(x.array() - p.centers[k]).square() / (Scalar(4) * p.width * p.width)).exp().matrix());
    for (Eigen::Index flat = 0; flat < amplitudes.size(); ++flat) {
      Scalar value = Scalar(1);
      Eigen::Index rest = flat;
      for (int k = 0; k < n; ++k) {
        value *= factors[k](rest % points);
        rest /= points;
      }
      amplitudes(flat) += p.coefficient * value;
    }
  }
  return normalized(GridWaveFunction<Scalar>(spec, std::move(amplitudes)));
}

template <typename Scalar>
GridWaveFunction<Scalar> make_grid_wavefunction(const GridSpec<Scalar>& spec,
                                                const std::vector<GaussianPacket<Scalar>>& packets) {
  return make_grid_wavefunction(spec, std::span<const GaussianPacket<Scalar>>(packets));
}

/// One-particle marginal of |psi|^2: the other N-1 coordinates integrated out.
/// Integrates (sum * dx) to norm_squared(psi).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> marginal_density(const GridWaveFunction<Scalar>& psi, int particle) {
  const auto& spec = psi.spec();
  if (particle < 0 || particle >= spec.num_particles)
    throw std::out_of_range("marginal_density: particle index out of range");
  const Eigen::Index points = spec.points_per_axis;
  const Eigen::Index stride = spec.stride(particle);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rho = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(points);
  const auto& a = psi.amplitudes();
  for (Eigen::Index flat = 0; flat < a.size(); ++flat) rho((flat / stride) % points) += std::norm(a(flat));
  rho *= std::pow(spec.spacing(), Scalar(spec.num_particles - 1));
  return rho;
}

}  // namespace grw
