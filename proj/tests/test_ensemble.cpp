#include "grw/ensemble.hpp"
#include "grw/errors.hpp"
#include "grw/io.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace grw;

namespace {

ScenarioConfig cat(double c1) {
  ScenarioConfig c;
  c.c1_sq = c1;
  c.total_time = 20.0;
  return c;
}

}  // namespace

TEST_CASE("ensemble needs at least two trajectories") {
  CHECK_THROWS_AS(run_ensemble(cat(0.5), 1, 0), std::invalid_argument);
}

TEST_CASE("summaries are byte-identical across reruns and thread counts") {
  auto c = cat(0.7);
  c.kind = ScenarioKind::Tail;
  const auto a = summary_csv(run_ensemble(c, 500, 42, 1).statistics);
  const auto b = summary_csv(run_ensemble(c, 500, 42, 1).statistics);
  const auto d = summary_csv(run_ensemble(c, 500, 42, 3).statistics);
  CHECK(a == b);
  CHECK(a == d);
  CHECK(a != summary_csv(run_ensemble(c, 500, 43, 1).statistics));
}

TEST_CASE("cat ensemble: martingale, selection and Poisson statistics pass") {
  const auto s = run_ensemble(cat(0.7), 4000, 7, 2);
  CHECK(s.n_trajectories == 4000);
  CHECK(s.failed_trajectories == 0);
  CHECK_FALSE(s.horizon_extended);
  for (const char* name :
       {"poisson_mean_flash_count", "poisson_chi2_pvalue", "martingale_mean_w1", "selection_frequency_branch1"}) {
    INFO(name);
    CHECK(s.statistic(name).pass);
  }
  CHECK(s.statistic("poisson_mean_flash_count").target == doctest::Approx(20.0));
  CHECK(s.statistic("martingale_mean_w1").target == doctest::Approx(0.7));
  CHECK(s.all_pass());
  REQUIRE(!s.histograms.empty());
  CHECK(s.histograms.front().name == "flash_count");
  CHECK_THROWS_AS(s.statistic("nope"), std::out_of_range);
}

TEST_CASE("rate additivity: N particles collapse N times as often") {
  auto c = cat(0.5);
  c.particles = 10;
  c.total_time = 1.0;
  const auto s = run_ensemble(c, 2000, 3, 1);
  CHECK(s.statistic("poisson_mean_flash_count").target == doctest::Approx(10.0));
  CHECK(s.statistic("poisson_mean_flash_count").pass);
}

TEST_CASE("marble ensemble against the binomial law") {
  ScenarioConfig c;
  c.kind = ScenarioKind::Marbles;
  c.n_marbles = 5;
  c.c1_sq = 0.9;
  c.total_time = 20.0;
  const auto s = run_ensemble(c, 2000, 5, 1);
  CHECK(s.statistic("all_inside_frequency").target == doctest::Approx(0.59049));
  CHECK(s.statistic("all_inside_frequency").pass);
  CHECK(s.statistic("mean_inside_count").target == doctest::Approx(4.5));
  CHECK(s.statistic("mean_inside_count").pass);
  CHECK(s.statistic("census_chi2_pvalue").pass);
}

TEST_CASE("tail ensemble: flip frequency is the smaller weight") {
  auto c = cat(0.9);
  c.kind = ScenarioKind::Tail;
  const auto s = run_ensemble(c, 5000, 11, 1);
  CHECK(s.statistic("resurrection_frequency").target == doctest::Approx(0.1));
  CHECK(s.statistic("resurrection_frequency").pass);
}

TEST_CASE("GRWf fresh preparation uses the supplied reference") {
  auto c = cat(0.99);
  c.ontology = Ontology::GRWf;
  c.box = Region(-2.0, 2.0);
  EnsembleOptions o;
  o.trajectories = 2000;
  o.seed = 1;
  oracle::VerdictProbabilities ref;
  ref.inside = 0.910657;
  ref.se_inside = 2.85e-4;
  o.first_window_reference = ref;
  const auto s = run_ensemble(c, o);
  CHECK(s.statistic("grwf_first_window_inside").target == 0.910657);
  CHECK(s.statistic("grwf_first_window_inside").pass);
  CHECK(s.statistic("initial_undefined_frequency").estimate == 1.0);
}

TEST_CASE("horizon auto-extends once") {
  auto c = cat(0.5);
  c.total_time = 3.0;  // ~5% unsettled at T, ~0.25% at 2T
  const auto s = run_ensemble(c, 2000, 2, 1);
  CHECK(s.horizon_extended);
  CHECK(s.config.total_time == 6.0);
  CHECK(s.statistic("poisson_mean_flash_count").target == doctest::Approx(6.0));

  c.total_time = 0.5;
  CHECK_THROWS_AS(run_ensemble(c, 500, 2, 1), InconclusiveError);
  EnsembleOptions no_extend;
  no_extend.trajectories = 500;
  c.total_time = 3.0;
  no_extend.auto_extend = false;
  CHECK_THROWS_AS(run_ensemble(c, no_extend), InconclusiveError);
}

TEST_CASE("grid backend ensemble") {
  ScenarioConfig c;
  c.backend = Backend::Grid;
  c.grid_points = 256;
  c.packet_width = 0.3;
  c.c1_sq = 0.7;
  c.total_time = 10.0;
  const auto s = run_ensemble(c, 300, 4, 2);
  CHECK(s.failed_trajectories == 0);
  CHECK(s.statistic("martingale_mean_w1").pass);
  CHECK(s.statistic("selection_frequency_branch1").pass);
}

TEST_CASE("simulate_system reproduces a member of the ensemble") {
  const auto c = cat(0.5);
  const auto a = simulate_system(c, 9, 3, 0);
  const auto b = simulate_system(c, 9, 3, 0);
  REQUIRE(a.record.events.size() == b.record.events.size());
  for (std::size_t i = 0; i < a.record.events.size(); ++i) CHECK(a.record.events[i].center == b.record.events[i].center);
  CHECK_THROWS_AS(simulate_system(c, 9, 3, 1), std::out_of_range);
}

TEST_CASE("thread count from the environment") {
  ::setenv("GRWSIM_THREADS", "3", 1);
  CHECK(default_thread_count() == 3);
  ::setenv("GRWSIM_THREADS", "zero", 1);
  CHECK(default_thread_count() == 1);
  ::unsetenv("GRWSIM_THREADS");
  CHECK(default_thread_count() == 1);
}

TEST_CASE("stream ids separate purposes") {
  CHECK(stream_id(StreamPurpose::Dynamics, 5) != stream_id(StreamPurpose::History, 5));
  CHECK_THROWS(stream_id(StreamPurpose::Dynamics, std::size_t{1} << 56));
}
