#include "grw/trajectory.hpp"

#include <doctest.h>

#include <cmath>

using namespace grw;

namespace {

BranchState cat(double w1) {
  Eigen::MatrixXd anchors(2, 1);
  anchors << 0.0, 10.0;
  return BranchState({w1, 1.0 - w1}, anchors, {"dead", "alive"});
}

GrwParams params(double T) { return GrwParams{.lambda_eff = 1.0, .sigma = 1.0, .total_time = T, .hamiltonian = {}}; }

}  // namespace

TEST_CASE("a stream determines the trajectory") {
  RngStream a(42, 1), b(42, 1), c(42, 2);
  const auto ra = run_trajectory(cat(0.5), params(20.0), a);
  const auto rb = run_trajectory(cat(0.5), params(20.0), b);
  const auto rc = run_trajectory(cat(0.5), params(20.0), c);
  REQUIRE(ra.events.size() == rb.events.size());
  for (std::size_t i = 0; i < ra.events.size(); ++i) {
    CHECK(ra.events[i].time == rb.events[i].time);
    CHECK(ra.events[i].center == rb.events[i].center);
  }
  CHECK((ra.events.size() != rc.events.size() || ra.events.front().time != rc.events.front().time));
}

TEST_CASE("events are ordered inside the horizon and chain their weights") {
  RngStream rng(1, 0);
  const auto r = run_trajectory(cat(0.7), params(30.0), rng);
  REQUIRE(r.ok());
  REQUIRE(!r.events.empty());
  CHECK(r.end_time == 30.0);
  std::vector<double> prev{0.7, 0.3};
  double t = 0.0;
  for (const auto& e : r.events) {
    CHECK(e.time > t);
    CHECK(e.time <= 30.0);
    t = e.time;
    CHECK(e.particle == 0);
    REQUIRE(e.pre_weights.size() == 2);
    CHECK(e.pre_weights[0] == doctest::Approx(prev[0]).epsilon(1e-15));
    CHECK(e.post_weights[0] + e.post_weights[1] == doctest::Approx(1.0).epsilon(1e-14));
    prev = e.post_weights;
  }
}

TEST_CASE("max_events stops the run early") {
  RngStream rng(2, 0);
  RunOptions options;
  options.max_events = 3;
  const auto r = run_trajectory(cat(0.5), params(1000.0), rng, options);
  CHECK(r.events.size() == 3);
  CHECK(r.end_time == doctest::Approx(r.events.back().time));
}

TEST_CASE("snapshots at requested times") {
  RngStream rng(3, 0);
  RunOptions options;
  options.snapshot_times = {0.0, 2.5, 10.0};
  const auto r = run_trajectory(cat(0.7), params(10.0), rng, options);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(std::get<BranchState>(state_at(r, 0.0)).weight(0) == doctest::Approx(0.7).epsilon(1e-15));
  const auto& last = std::get<BranchState>(state_at(r, 10.0));
  CHECK(last.weight(0) == doctest::Approx(std::get<BranchState>(r.final_state).weight(0)).epsilon(1e-15));
  CHECK_THROWS(state_at(r, 5.0));
}

TEST_CASE("grid trajectory with free evolution stays normalized") {
  const GridSpecd spec{-10.0, 20.0, 256, 1};
  const auto psi = make_grid_wavefunction(
      spec, std::vector<GaussianPacketd>{{{0.0}, 0.4, std::sqrt(0.5)}, {{10.0}, 0.4, std::sqrt(0.5)}});
  GrwParams p = params(5.0);
  p.hamiltonian = FreeParticleHamiltonian{{5.0}};
  RngStream rng(4, 0);
  RunOptions options;
  options.summary_region = Region(-5.0, 5.0);
  const auto r = run_trajectory(psi, p, rng, options);
  REQUIRE(r.ok());
  CHECK(norm_squared(std::get<GridWaveFunctiond>(r.final_state)) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& e : r.events) {
    REQUIRE(e.post_weights.size() == 2);
    CHECK(e.post_weights[0] + e.post_weights[1] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("parameter validation") {
  RngStream rng(0, 0);
  GrwParams bad = params(1.0);
  bad.sigma = 0.0;
  CHECK_THROWS_AS(run_trajectory(cat(0.5), bad, rng), std::invalid_argument);
  GrwParams free = params(1.0);
  free.hamiltonian = FreeParticleHamiltonian{};
  CHECK_THROWS_AS(run_trajectory(cat(0.5), free, rng), std::invalid_argument);
  RunOptions late;
  late.snapshot_times = {2.0};
  CHECK_THROWS_AS(run_trajectory(cat(0.5), params(1.0), rng, late), std::invalid_argument);
}

TEST_CASE("weight summary of a grid state is the mass in and out of the region") {
  const GridSpecd spec{-10.0, 20.0, 512, 1};
  const SystemState psi = make_grid_wavefunction(
      spec, std::vector<GaussianPacketd>{{{0.0}, 0.2, std::sqrt(0.9)}, {{10.0}, 0.2, std::sqrt(0.1)}});
  const auto w = weight_summary(psi, Region(-5.0, 5.0));
  REQUIRE(w.size() == 2);
  CHECK(w[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(weight_summary(psi, std::nullopt).empty());
}
