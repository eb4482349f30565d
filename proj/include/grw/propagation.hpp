#pragma once

#include "grw/grid_wavefunction.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

namespace grw {

struct ZeroHamiltonian {};

/// H = sum_k -1/(2 m_k) d^2/dx_k^2 with hbar = 1. A single mass applies to
/// every particle.
struct FreeParticleHamiltonian {
  std::vector<double> masses{1.0};

  double mass(int particle) const { return masses.size() == 1 ? masses.front() : masses.at(particle); }
};

using Hamiltonian = std::variant<ZeroHamiltonian, FreeParticleHamiltonian>;

/// Largest configuration grid the spectral propagator accepts.
inline constexpr Eigen::Index kMaxSpectralPoints = Eigen::Index(1) << 24;

namespace detail {

template <typename Scalar>
void free_propagate(GridWaveFunction<Scalar>& psi, Scalar dt, const FreeParticleHamiltonian& h) {
  using Complex = std::complex<Scalar>;
  const auto& spec = psi.spec();
  if (spec.total_points() > kMaxSpectralPoints)
    throw std::invalid_argument("evolve_unitary: grid too large for spectral propagation");
  if (!h.masses.empty() && h.masses.size() != 1 && static_cast<int>(h.masses.size()) != spec.num_particles)
    throw std::invalid_argument("evolve_unitary: need one mass or one mass per particle");

  const Eigen::Index points = spec.points_per_axis;
  const Scalar period = Scalar(points) * spec.spacing();
  Eigen::FFT<Scalar> fft;
  std::vector<Complex> line(static_cast<std::size_t>(points));
  std::vector<Complex> spectrum(static_cast<std::size_t>(points));
  auto& a = psi.amplitudes();

  for (int k = 0; k < spec.num_particles; ++k) {
    const Scalar mass = Scalar(h.mass(k));
    if (!(mass > Scalar(0))) throw std::invalid_argument("evolve_unitary: masses must be > 0");
    std::vector<Complex> phase(static_cast<std::size_t>(points));
    for (Eigen::Index j = 0; j < points; ++j) {
      const Eigen::Index n = j <= points / 2 ? j : j - points;
      const Scalar wavenumber = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(n) / period;
      phase[static_cast<std::size_t>(j)] = std::polar(Scalar(1), -wavenumber * wavenumber * dt / (Scalar(2) * mass));
    }

    const Eigen::Index stride = spec.stride(k);
    const Eigen::Index block = stride * points;
    for (Eigen::Index outer = 0; outer < a.size(); outer += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        const Eigen::Index base = outer + inner;
        for (Eigen::Index j = 0; j < points; ++j) line[static_cast<std::size_t>(j)] = a(base + j * stride);
        fft.fwd(spectrum, line);
        for (std::size_t j = 0; j < spectrum.size(); ++j) spectrum[j] *= phase[j];
        fft.inv(line, spectrum);
        for (Eigen::Index j = 0; j < points; ++j) a(base + j * stride) = line[static_cast<std::size_t>(j)];
      }
    }
  }
}

}  // namespace detail

/// Unitary evolution over dt between collapses. Zero is the identity; the free
/// Hamiltonian is applied exactly in Fourier space (periodic grid).
template <typename Scalar>
GridWaveFunction<Scalar> evolve_unitary(GridWaveFunction<Scalar> psi, Scalar dt, const Hamiltonian& hamiltonian) {
  if (!(dt >= Scalar(0))) throw std::invalid_argument("evolve_unitary: dt must be >= 0");
  if (dt == Scalar(0)) return psi;
  if (const auto* free = std::get_if<FreeParticleHamiltonian>(&hamiltonian)) detail::free_propagate(psi, dt, *free);
  return psi;
}

}  // namespace grw
