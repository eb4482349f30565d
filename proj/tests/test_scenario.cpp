#include "grw/errors.hpp"
#include "grw/scenario.hpp"

#include <doctest.h>

#include <cmath>

using namespace grw;

namespace {

BranchState weights(double w1) {
  Eigen::MatrixXd anchors(2, 1);
  anchors << 0.0, 10.0;
  return BranchState({w1, 1.0 - w1}, anchors, {"inside", "outside"});
}

TrajectoryRecord crafted(const std::vector<std::pair<double, double>>& w1_at) {
  std::vector<Snapshot> snaps;
  for (const auto& [t, w] : w1_at) snaps.push_back({t, weights(w)});
  return TrajectoryRecord{{}, snaps, snaps.back().state, w1_at.back().first, std::nullopt};
}

std::vector<Flash> flashes_with(int inside, int outside) {
  std::vector<Flash> f;
  for (int i = 0; i < inside; ++i) f.push_back({0.01 * i, 0.0, 0});
  for (int i = 0; i < outside; ++i) f.push_back({0.01 * (inside + i), 10.0, 0});
  return f;
}

}  // namespace

TEST_CASE("threshold rule") {
  CHECK(threshold_verdict(0.9, 0.5) == Verdict::Inside);
  CHECK(threshold_verdict(0.5, 0.5) == Verdict::Partial);
  CHECK(threshold_verdict(0.02, 0.5) == Verdict::Outside);
  CHECK(threshold_verdict(0.99, 0.99) == Verdict::Inside);
  CHECK(threshold_verdict(0.985, 0.99) == Verdict::Partial);
  CHECK(threshold_verdict(0.01, 0.99) == Verdict::Outside);
  CHECK_THROWS_AS(threshold_verdict(0.5, 0.3), std::invalid_argument);
}

TEST_CASE("GRWm: a 0.1 tail outside still reads as inside") {
  CHECK(classify_grwm(0.9, 0.5).verdict == Verdict::Inside);
  CHECK(classify_grwm(0.5, 0.5).verdict == Verdict::Partial);
  CHECK(classify_grwm(0.02, 0.5).verdict == Verdict::Outside);
  CHECK(classify_grwm(0.9, 0.5).evidence == 0.9);
}

TEST_CASE("GRWf verdicts from flash counts") {
  const Region box(-5.0, 5.0);
  CHECK(classify_grwf(flashes_with(100, 0), box, {0.0, 10.0}, 0.99).verdict == Verdict::Inside);
  CHECK(classify_grwf(flashes_with(50, 50), box, {0.0, 10.0}, 0.99).verdict == Verdict::Partial);
  CHECK(classify_grwf(flashes_with(0, 0), box, {0.0, 10.0}, 0.99).verdict == Verdict::Undefined);
  CHECK(classify_grwf(flashes_with(1, 99), box, {0.0, 10.0}, 0.99).verdict == Verdict::Outside);
}

TEST_CASE("GRW0 reads the label weight") {
  const auto v = classify_grw0({{"dead", 0.97}, {"alive", 0.03}}, "dead", 0.5);
  CHECK(v.verdict == Verdict::Inside);
  CHECK(v.ontology == Ontology::GRW0);
  CHECK(classify_grw0({{"alive", 1.0}}, "dead", 0.5).verdict == Verdict::Undefined);
}

TEST_CASE("build_scenario: cat and marbles") {
  RngStream rng(0, 0);
  ScenarioConfig cat;
  const auto s = build_scenario(cat, rng);
  REQUIRE(s.systems.size() == 1);
  const auto& b = std::get<BranchState>(s.systems[0].state);
  CHECK(b.weight(0) == doctest::Approx(0.5));
  CHECK(b.labels()[0] == "dead");
  CHECK(s.systems[0].prior_flashes.empty());

  ScenarioConfig marbles;
  marbles.kind = ScenarioKind::Marbles;
  marbles.n_marbles = 5;
  marbles.c1_sq = 0.9;
  const auto m = build_scenario(marbles, rng);
  REQUIRE(m.systems.size() == 5);
  for (const auto& sys : m.systems) CHECK(std::get<BranchState>(sys.state).weight(0) == doctest::Approx(0.9));
}

TEST_CASE("collapsed past seeds flashes inside the box before t = 0") {
  ScenarioConfig c;
  c.history = History::CollapsedPast;
  c.ontology = Ontology::GRWf;
  c.box = Region(-1.0, 1.0);
  RngStream rng(1, 0);
  const auto flashes = seed_prior_flashes(c, rng);
  CHECK(flashes.size() > 50);
  for (const auto& f : flashes) {
    CHECK(c.box.contains(f.position));
    CHECK(f.time < 0.0);
    CHECK(f.time >= -c.window_length());
  }
  // With that history GRWf says Inside right away.
  const auto classify = make_classifier(c, flashes);
  RngStream dyn(1, 1);
  const auto record = run_trajectory(make_initial_state(c), c.grw_params(), dyn, trajectory_plan(c));
  CHECK(classify(record, 0.0).verdict == Verdict::Inside);
}

TEST_CASE("fresh preparation: GRWf has no verdict at t = 0, GRWm is inside") {
  ScenarioConfig c;
  c.c1_sq = 0.99;
  c.ontology = Ontology::GRWf;
  RngStream rng(2, 0);
  const auto record = run_trajectory(make_initial_state(c), c.grw_params(), rng, trajectory_plan(c));
  CHECK(make_classifier(c, {})(record, 0.0).verdict == Verdict::Undefined);
  c.ontology = Ontology::GRWm;
  CHECK(make_classifier(c, {})(record, 0.0).verdict == Verdict::Inside);
}

TEST_CASE("config invariants") {
  ScenarioConfig c;
  c.c1_sq = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.theta_f = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.backend = Backend::Grid;
  c.kind = ScenarioKind::Marbles;
  c.n_marbles = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.anchor_outside = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.free_hamiltonian = true;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("default horizons scale with the collapse rate") {
  ScenarioConfig c;
  c.particles = 4;
  c.lambda_eff = 0.25;
  CHECK(c.window_length() == doctest::Approx(100.0));
  CHECK(c.sampling_interval() == doctest::Approx(1.0));
  CHECK(c.martingale_at() == doctest::Approx(20.0));
  c.total_time = 5.0;
  CHECK(c.martingale_at() == doctest::Approx(5.0));
  const auto times = resurrection_sampling_times(c);
  CHECK(times.size() == 6);
  CHECK(times.back() == 5.0);
}

TEST_CASE("resurrection detection on crafted histories") {
  ScenarioConfig c;
  const auto classify = make_classifier(c, {});
  const std::vector<double> times{0.0, 1.0, 2.0, 3.0};

  const auto monotone = crafted({{0.0, 0.9}, {1.0, 0.99}, {2.0, 0.999}, {3.0, 1.0}});
  CHECK(detect_resurrection(monotone, classify, times).empty());

  const auto flip = crafted({{0.0, 0.999}, {1.0, 0.999}, {2.0, 0.001}, {3.0, 0.001}});
  const auto t = detect_resurrection(flip, classify, times);
  REQUIRE(t.size() == 1);
  CHECK(t[0].time == 2.0);
  CHECK(t[0].from == Verdict::Inside);
  CHECK(t[0].to == Verdict::Outside);

  // A Partial sample between two Inside samples is not a transition.
  const auto wobble = crafted({{0.0, 0.9}, {1.0, 0.5}, {2.0, 0.9}, {3.0, 0.9}});
  CHECK(detect_resurrection(wobble, classify, times).empty());

  CHECK_THROWS_AS(detect_resurrection(flip, classify, std::vector<double>{0.0}), std::invalid_argument);
}

TEST_CASE("marble census") {
  const std::vector<Classification> v{{Verdict::Inside, 1.0, Ontology::GRWm},
                                      {Verdict::Inside, 0.9, Ontology::GRWm},
                                      {Verdict::Outside, 0.0, Ontology::GRWm},
                                      {Verdict::Partial, 0.5, Ontology::GRWm}};
  const auto c = marble_census(v);
  CHECK(c.inside == 2);
  CHECK(c.outside == 1);
  CHECK(c.partial == 1);
  CHECK(c.total() == 4);
  const std::vector<Classification> mixed{{Verdict::Inside, 1.0, Ontology::GRWm}, {Verdict::Inside, 1.0, Ontology::GRWf}};
  CHECK_THROWS_AS(marble_census(mixed), std::invalid_argument);
}

TEST_CASE("grid backend builds a normalized superposition") {
  ScenarioConfig c;
  c.backend = Backend::Grid;
  c.c1_sq = 0.8;
  const auto psi = std::get<GridWaveFunctiond>(make_initial_state(c));
  CHECK(norm_squared(psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(weight_summary(psi, c.box)[0] == doctest::Approx(0.8).epsilon(1e-10));
}
