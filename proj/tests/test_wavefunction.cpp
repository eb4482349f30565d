#include "grw/branch_state.hpp"
#include "grw/grid_wavefunction.hpp"
#include "grw/propagation.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace grw;

namespace {

double moment(const Eigen::VectorXd& rho, const GridSpecd& spec, int power) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < rho.size(); ++j) m += std::pow(spec.coordinate(j), power) * rho(j);
  return m * spec.spacing();
}

}  // namespace

TEST_CASE("grid spec geometry") {
  const GridSpecd spec{-1.0, 1.0, 5, 2};
  CHECK(spec.spacing() == doctest::Approx(0.5));
  CHECK(spec.coordinate(4) == doctest::Approx(1.0));
  CHECK(spec.total_points() == 25);
  CHECK(spec.stride(0) == 1);
  CHECK(spec.stride(1) == 5);
  CHECK(spec.cell_volume() == doctest::Approx(0.25));

  CHECK_THROWS_AS((GridSpecd{1.0, -1.0, 5, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpecd{-1.0, 1.0, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpecd{-1.0, 1.0, 8, 4}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpecd{-1.0, 1.0, 10000, 3}.validate()), std::invalid_argument);
}

TEST_CASE("packets are normalized and centered") {
  const GridSpecd spec{-10.0, 10.0, 801, 1};
  const std::vector<GaussianPacketd> one{{{1.5}, 0.4, {2.0, 0.0}}};
  const auto psi = make_grid_wavefunction(spec, one);
  CHECK(norm_squared(psi) == doctest::Approx(1.0).epsilon(1e-12));
  const auto rho = marginal_density(psi, 0);
  CHECK(moment(rho, spec, 1) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(moment(rho, spec, 2) - 1.5 * 1.5 == doctest::Approx(0.16).epsilon(1e-8));
}

TEST_CASE("two-branch superposition has weights |c_i|^2") {
  const GridSpecd spec{-10.0, 20.0, 1024, 1};
  const std::vector<GaussianPacketd> packets{{{0.0}, 0.3, std::sqrt(0.7)}, {{10.0}, 0.3, std::sqrt(0.3)}};
  const auto rho = marginal_density(make_grid_wavefunction(spec, packets), 0);
  double left = 0.0;
  for (Eigen::Index j = 0; j < rho.size(); ++j)
    if (spec.coordinate(j) < 5.0) left += rho(j) * spec.spacing();
  CHECK(left == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("marginals of a two-particle product state") {
  const GridSpecd spec{-6.0, 6.0, 128, 2};
  const std::vector<GaussianPacketd> packets{{{-1.0, 2.0}, 0.5, {1.0, 0.0}}};
  const auto psi = make_grid_wavefunction(spec, packets);
  const auto rho0 = marginal_density(psi, 0);
  const auto rho1 = marginal_density(psi, 1);
  CHECK(rho0.sum() * spec.spacing() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(moment(rho0, spec, 1) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(moment(rho1, spec, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS(marginal_density(psi, 2), std::out_of_range);
}

TEST_CASE("packet preconditions") {
  const GridSpecd spec{-5.0, 5.0, 101, 1};
  CHECK_THROWS_AS(make_grid_wavefunction(spec, std::vector<GaussianPacketd>{}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid_wavefunction(spec, std::vector<GaussianPacketd>{{{0.0}, 0.1, {1.0, 0.0}}}),
                  std::invalid_argument);  // narrower than two cells
  CHECK_THROWS_AS(make_grid_wavefunction(spec, std::vector<GaussianPacketd>{{{7.0}, 0.5, {1.0, 0.0}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_grid_wavefunction(spec, std::vector<GaussianPacketd>{{{0.0}, 0.5, {0.0, 0.0}}}),
                  std::invalid_argument);
}

TEST_CASE("zero Hamiltonian is the identity, free evolution spreads a packet") {
  const GridSpecd spec{-20.0, 20.0, 1024, 1};
  const std::vector<GaussianPacketd> packets{{{0.0}, 0.5, {1.0, 0.0}}};
  const auto psi = make_grid_wavefunction(spec, packets);
  const auto same = evolve_unitary(psi, 3.0, Hamiltonian{ZeroHamiltonian{}});
  CHECK((same.amplitudes() - psi.amplitudes()).norm() == 0.0);

  // Variance of a free Gaussian: s0^2 + t^2 / (4 m^2 s0^2) = 0.25 + 4 = 4.25 at t = 2, m = 1.
  const auto later = evolve_unitary(psi, 2.0, Hamiltonian{FreeParticleHamiltonian{{1.0}}});
  CHECK(norm_squared(later) == doctest::Approx(1.0).epsilon(1e-12));
  const auto rho = marginal_density(later, 0);
  CHECK(moment(rho, spec, 2) == doctest::Approx(4.25).epsilon(1e-8));

  // Heavier particle spreads less: m = 4 gives 0.25 + 0.25.
  const auto heavy = evolve_unitary(psi, 2.0, Hamiltonian{FreeParticleHamiltonian{{4.0}}});
  CHECK(moment(marginal_density(heavy, 0), spec, 2) == doctest::Approx(0.5).epsilon(1e-8));

  CHECK_THROWS_AS(evolve_unitary(psi, -1.0, Hamiltonian{ZeroHamiltonian{}}), std::invalid_argument);
}

TEST_CASE("branch state normalization and lookups") {
  Eigen::MatrixXd anchors(2, 1);
  anchors << 0.0, 10.0;
  const BranchState s({0.7, 0.3}, anchors, {"dead", "alive"});
  CHECK(s.num_branches() == 2);
  CHECK(s.weight(0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(s.find("alive") == 1);
  CHECK(s.find("missing") == -1);
  CHECK(s.min_separation() == doctest::Approx(10.0));

  CHECK_THROWS_AS(BranchState({0.7, 0.2}, anchors, {"a", "b"}), std::invalid_argument);
  CHECK_THROWS_AS(BranchState({0.7, 0.3}, anchors, {"a"}), std::invalid_argument);
  CHECK_THROWS_AS(BranchState({1.2, -0.2}, anchors, {"a", "b"}), std::invalid_argument);

  Eigen::VectorXd logs(2);
  logs << std::log(2.0), std::log(6.0);
  const auto from_logs = BranchState::from_log_weights(logs, anchors, {"a", "b"});
  CHECK(from_logs.weight(0) == doctest::Approx(0.25).epsilon(1e-15));

  Eigen::VectorXd with_zero(2);
  with_zero << 0.0, -std::numeric_limits<double>::infinity();
  CHECK(BranchState::from_log_weights(with_zero, anchors, {"a", "b"}).weight(1) == 0.0);
}

TEST_CASE("log_sum_exp is stable for large magnitudes") {
  Eigen::VectorXd v(3);
  v << -1000.0, -1000.0, -1000.0;
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(3.0)).epsilon(1e-14));
  v << 800.0, 0.0, -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(v) == doctest::Approx(800.0).epsilon(1e-14));
}

TEST_CASE("region rejects empty intervals") {
  CHECK_THROWS_AS(Region(1.0, 1.0), std::invalid_argument);
  const Region r(-1.0, 2.0);
  CHECK(r.contains(-1.0));
  CHECK(r.contains(2.0));
  CHECK_FALSE(r.contains(2.0000001));
}
