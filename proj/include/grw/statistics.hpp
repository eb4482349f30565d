#pragma once

#include "grw/grid_wavefunction.hpp"
#include "grw/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace grw {

/// One analytic comparison. For z-tests `z` = (estimate - target) / se; for
/// chi-square tests `estimate` is the p-value, `target` is p_min and `z` is NaN.
struct StatisticRecord {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double target = 0.0;
  double z = 0.0;
  bool pass = false;
  std::string provenance;  // where the target comes from
};

struct Thresholds {
  double z_max = 4.0;
  double p_min = 0.001;
};

/// z-test of a sample mean against an analytic target. A zero standard
/// error passes only when the mean equals the target to 1e-12.
StatisticRecord mean_z_test(std::string name, std::span<const double> samples, double target, double z_max,
                            std::string provenance);

/// Binomial z-test of a success count against probability p.
StatisticRecord proportion_z_test(std::string name, std::size_t successes, std::size_t trials, double p,
                                  double z_max, std::string provenance);

/// Upper tail P(chi2_dof >= x).
double chi_square_survival(double x, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
  std::size_t bins = 0;
};

/// Goodness of fit of integer counts against a pmf on {0, 1, ...}. Adjacent
/// cells are merged left to right until each expects >= 5; the last cell
/// absorbs the upper tail. Throws if fewer than `min_bins` cells remain.
ChiSquareResult chi_square_counts(std::span<const std::uint64_t> counts, std::span<const double> pmf,
                                  std::size_t min_bins = 3);

/// Poisson(mean) pmf on 0..max_k.
std::vector<double> poisson_pmf(double mean, std::size_t max_k);
/// Binomial(n, p) pmf on 0..n.
std::vector<double> binomial_pmf(std::size_t n, double p);

/// Mean of w1(t) across trajectories against w1(0).
StatisticRecord martingale_test(std::span<const double> w1_at_t, double w1_initial, double z_max);

/// Winner-frequency z-test against c1_sq. Throws InconclusiveError when fewer
/// than 99% of trajectories reached max weight > 0.99.
StatisticRecord selection_frequency_test(std::span<const int> winners, std::span<const double> max_weights,
                                         double c1_sq, double z_max);

/// Mean-count z-test and chi-square goodness of fit of flash counts against
/// Poisson(expected_mean).
std::vector<StatisticRecord> poisson_flash_test(std::span<const std::uint64_t> counts, double expected_mean,
                                                const Thresholds& thresholds);

/// Tolerance for the histogram total-variation distance, 0.9 * sqrt(bins / n).
double center_histogram_tolerance(std::size_t bins, std::size_t n_samples);

/// Total-variation distance between the normalized histogram of `samples`
/// over [lo, hi) in `bins` equal bins and `expected` bin probabilities.
/// Samples outside the range count toward an implicit overflow bin.
double total_variation(std::span<const double> samples, double lo, double hi, std::span<const double> expected);

/// Samples the grid collapse-center law n_samples times and compares the
/// histogram to the tabulated density, binned over the grid axis.
StatisticRecord center_histogram_test(const GridWaveFunctiond& psi, int particle, double sigma,
                                      std::size_t n_samples, RngStream& rng, std::size_t bins = 50);

}  // namespace grw
