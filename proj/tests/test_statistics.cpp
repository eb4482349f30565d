#include "grw/errors.hpp"
#include "grw/statistics.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace grw;

TEST_CASE("chi-square survival against tabulated quantiles") {
  CHECK(chi_square_survival(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_survival(18.307038053275146, 10.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_survival(6.634896601021214, 1.0) == doctest::Approx(0.01).epsilon(1e-9));
  // Two degrees of freedom: exp(-x/2).
  CHECK(chi_square_survival(5.0, 2.0) == doctest::Approx(std::exp(-2.5)).epsilon(1e-13));
  CHECK(chi_square_survival(0.0, 3.0) == 1.0);
  CHECK_THROWS_AS(chi_square_survival(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("pmfs") {
  const auto b = binomial_pmf(5, 0.9);
  CHECK(b[5] == doctest::Approx(0.59049).epsilon(1e-13));
  CHECK(std::accumulate(b.begin(), b.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  double mean = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) mean += double(k) * b[k];
  CHECK(mean == doctest::Approx(4.5).epsilon(1e-13));
  CHECK(binomial_pmf(3, 1.0)[3] == 1.0);

  const auto p = poisson_pmf(10.0, 80);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p[10] == doctest::Approx(std::exp(-10.0) * std::pow(10.0, 10) / 3628800.0).epsilon(1e-12));
}

TEST_CASE("z-tests and their zero-SE edge cases") {
  const auto r = proportion_z_test("x", 7000, 10000, 0.7, 4.0, "");
  CHECK(r.estimate == doctest::Approx(0.7));
  CHECK(r.se == doctest::Approx(std::sqrt(0.21 / 10000)));
  CHECK(r.z == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.pass);

  CHECK(proportion_z_test("x", 7400, 10000, 0.7, 4.0, "").pass == false);
  CHECK(proportion_z_test("always", 50, 50, 1.0, 4.0, "").pass);
  CHECK_FALSE(proportion_z_test("always", 49, 50, 1.0, 4.0, "").pass);

  const std::vector<double> ones(10, 1.0);
  const auto m = mean_z_test("absorbed", ones, 1.0, 4.0, "");
  CHECK(m.se == 0.0);
  CHECK(m.pass);
  CHECK_THROWS_AS(mean_z_test("short", std::vector<double>{1.0}, 1.0, 4.0, ""), std::invalid_argument);
}

TEST_CASE("martingale test at t = 0 is exact") {
  const std::vector<double> w(1000, 0.7);
  const auto r = martingale_test(w, 0.7, 4.0);
  CHECK(r.estimate == doctest::Approx(0.7));
  CHECK(r.pass);
}

TEST_CASE("selection test needs settled trajectories") {
  std::vector<int> winners(100, 0);
  std::vector<double> settled(100, 0.999);
  for (int i = 0; i < 30; ++i) winners[i] = 1;
  CHECK(selection_frequency_test(winners, settled, 0.7, 4.0).pass);
  std::vector<double> unsettled(100, 0.999);
  unsettled[0] = unsettled[1] = 0.6;
  CHECK_THROWS_AS(selection_frequency_test(winners, unsettled, 0.7, 4.0), InconclusiveError);
}

TEST_CASE("chi-square merging and bin count") {
  // Exact expected counts give statistic 0 and p = 1.
  const std::vector<double> pmf{0.25, 0.25, 0.25, 0.25};
  const std::vector<std::uint64_t> counts{25, 25, 25, 25};
  const auto r = chi_square_counts(counts, pmf);
  CHECK(r.statistic == doctest::Approx(0.0));
  CHECK(r.p_value == doctest::Approx(1.0));
  CHECK(r.bins == 4);

  // Tiny cells are merged into their neighbours.
  const std::vector<double> skewed{0.01, 0.01, 0.48, 0.5};
  const std::vector<std::uint64_t> c2{1, 1, 48, 50};
  CHECK(chi_square_counts(c2, skewed, 2).bins == 2);
  CHECK_THROWS_AS(chi_square_counts(c2, skewed, 3), std::invalid_argument);
}

TEST_CASE("poisson flash test on exact Poisson counts") {
  RngStream rng(8, 0);
  std::vector<std::uint64_t> counts(10000);
  std::poisson_distribution<std::uint64_t> pois(10.0);
  for (auto& c : counts) c = pois(rng.engine());
  const auto r = poisson_flash_test(counts, 10.0, {});
  REQUIRE(r.size() == 2);
  CHECK(r[0].name == "poisson_mean_flash_count");
  CHECK(r[0].pass);
  CHECK(r[1].pass);
  CHECK(std::isnan(r[1].z));
  // Wrong rate is rejected.
  CHECK_FALSE(poisson_flash_test(counts, 10.5, {})[0].pass);
}

TEST_CASE("total variation") {
  const std::vector<double> samples{0.1, 0.3, 0.6, 0.8};
  const std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};
  CHECK(total_variation(samples, 0.0, 1.0, uniform) == doctest::Approx(0.0));
  const std::vector<double> lumped{0.1, 0.1, 0.1, 0.1};
  CHECK(total_variation(lumped, 0.0, 1.0, uniform) == doctest::Approx(0.75));
  const std::vector<double> outside{2.0, 2.0, 2.0, 2.0};
  CHECK(total_variation(outside, 0.0, 1.0, uniform) == doctest::Approx(1.0));
}

TEST_CASE("center histogram preconditions") {
  const GridSpecd spec{-5.0, 5.0, 101, 1};
  const auto psi = make_grid_wavefunction(spec, std::vector<GaussianPacketd>{{{0.0}, 0.5, {1.0, 0.0}}});
  RngStream rng(0, 0);
  CHECK_THROWS_AS(center_histogram_test(psi, 0, 1.0, 999, rng), std::invalid_argument);
}
