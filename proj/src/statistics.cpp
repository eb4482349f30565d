#include "grw/statistics.hpp"

#include "grw/collapse.hpp"
#include "grw/errors.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace grw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

StatisticRecord z_record(std::string name, double estimate, double se, double target, double z_max,
                         std::string provenance) {
  StatisticRecord r{std::move(name), estimate, se, target, 0.0, false, std::move(provenance)};
  // Below 1e-12 the spread is rounding noise of a degenerate sample.
  if (se > 1e-12) {
    r.z = (estimate - target) / se;
    r.pass = std::abs(r.z) <= z_max;
  } else {
    r.z = std::abs(estimate - target) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                                     estimate - target);
    r.pass = std::abs(estimate - target) <= 1e-12;
  }
  return r;
}

}  // namespace

StatisticRecord mean_z_test(std::string name, std::span<const double> samples, double target, double z_max,
                            std::string provenance) {
  if (samples.size() < 2) throw std::invalid_argument("mean_z_test: need at least two samples");
  const double n = double(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  return z_record(std::move(name), mean, se, target, z_max, std::move(provenance));
}

StatisticRecord proportion_z_test(std::string name, std::size_t successes, std::size_t trials, double p,
                                  double z_max, std::string provenance) {
  if (trials == 0) throw std::invalid_argument("proportion_z_test: no trials");
  const double estimate = double(successes) / double(trials);
  const double se = std::sqrt(p * (1.0 - p) / double(trials));
  return z_record(std::move(name), estimate, se, p, z_max, std::move(provenance));
}

double chi_square_survival(double x, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_survival: dof must be > 0");
  if (x <= 0.0) return 1.0;
  return Eigen::numext::igammac(0.5 * dof, 0.5 * x);
}

ChiSquareResult chi_square_counts(std::span<const std::uint64_t> counts, std::span<const double> pmf,
                                  std::size_t min_bins) {
  const double n = double(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (n <= 0.0) throw std::invalid_argument("chi_square_counts: no observations");
  const std::size_t cells = std::max(counts.size(), pmf.size());
  std::vector<double> observed(cells, 0.0), expected(cells, 0.0);
  for (std::size_t k = 0; k < counts.size(); ++k) observed[k] = double(counts[k]);
  double covered = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    expected[k] = n * pmf[k];
    covered += pmf[k];
  }
  expected.back() += n * std::max(0.0, 1.0 - covered);

  std::vector<std::pair<double, double>> merged;  // (observed, expected)
  double o = 0.0, e = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= 5.0) {
      merged.emplace_back(o, e);
      o = e = 0.0;
    }
  }
  if (o > 0.0 || e > 0.0) {
    if (merged.empty())
      merged.emplace_back(o, e);
    else {
      merged.back().first += o;
      merged.back().second += e;
    }
  }
  if (merged.size() < min_bins) throw std::invalid_argument("chi_square_counts: fewer than the required usable bins");

  ChiSquareResult r;
  for (const auto& [obs, exp] : merged) {
    if (exp <= 0.0) {
      if (obs > 0.0) r.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    r.statistic += (obs - exp) * (obs - exp) / exp;
  }
  r.bins = merged.size();
  r.dof = double(merged.size() - 1);
  r.p_value = std::isfinite(r.statistic) ? chi_square_survival(r.statistic, r.dof) : 0.0;
  return r;
}

std::vector<double> poisson_pmf(double mean, std::size_t max_k) {
  if (!(mean > 0.0)) throw std::invalid_argument("poisson_pmf: mean must be > 0");
  std::vector<double> pmf(max_k + 1);
  for (std::size_t k = 0; k <= max_k; ++k)
    pmf[k] = std::exp(double(k) * std::log(mean) - mean - std::lgamma(double(k) + 1.0));
  return pmf;
}

std::vector<double> binomial_pmf(std::size_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_pmf: p must lie in [0, 1]");
  std::vector<double> pmf(n + 1, 0.0);
  if (p == 0.0 || p == 1.0) {
    pmf[p == 0.0 ? 0 : n] = 1.0;
    return pmf;
  }
  const double ln = std::lgamma(double(n) + 1.0);
  for (std::size_t k = 0; k <= n; ++k)
    pmf[k] = std::exp(ln - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0) + double(k) * std::log(p) +
                      double(n - k) * std::log1p(-p));
  return pmf;
}

StatisticRecord martingale_test(std::span<const double> w1_at_t, double w1_initial, double z_max) {
  return mean_z_test("martingale_mean_w1", w1_at_t, w1_initial, z_max,
                     "E[w1(t)] = w1(0): expected posterior weight equals prior weight at every collapse");
}

StatisticRecord selection_frequency_test(std::span<const int> winners, std::span<const double> max_weights,
                                         double c1_sq, double z_max) {
  if (winners.size() != max_weights.size() || winners.empty())
    throw std::invalid_argument("selection_frequency_test: mismatched or empty inputs");
  const auto settled = std::count_if(max_weights.begin(), max_weights.end(), [](double w) { return w > 0.99; });
  if (double(settled) < 0.99 * double(max_weights.size()))
    throw InconclusiveError("selection_frequency_test: horizon too short (max weight > 0.99 in fewer than 99%)");
  const auto first = std::count(winners.begin(), winners.end(), 0);
  return proportion_z_test("selection_frequency_branch1", static_cast<std::size_t>(first), winners.size(), c1_sq, z_max,
                           "limit branch is i with probability |c_i|^2");
}

std::vector<StatisticRecord> poisson_flash_test(std::span<const std::uint64_t> counts, double expected_mean,
                                                const Thresholds& thresholds) {
  if (counts.size() < 2) throw std::invalid_argument("poisson_flash_test: need at least two trajectories");
  std::vector<double> as_real(counts.begin(), counts.end());
  std::vector<StatisticRecord> out;
  out.push_back(mean_z_test("poisson_mean_flash_count", as_real, expected_mean, thresholds.z_max,
                            "flash count in [0,T] has mean N*lambda_eff*T"));

  const std::uint64_t max_seen = *std::max_element(counts.begin(), counts.end());
  std::vector<std::uint64_t> histogram(static_cast<std::size_t>(max_seen) + 1, 0);
  for (auto c : counts) ++histogram[static_cast<std::size_t>(c)];
  const auto max_k = std::max<std::size_t>(static_cast<std::size_t>(max_seen),
                                           static_cast<std::size_t>(expected_mean + 10.0 * std::sqrt(expected_mean) + 20.0));
  const auto pmf = poisson_pmf(expected_mean, max_k);
  const ChiSquareResult chi = chi_square_counts(histogram, pmf);
  out.push_back({"poisson_chi2_pvalue", chi.p_value, 0.0, thresholds.p_min, kNaN, chi.p_value >= thresholds.p_min,
                 "flash count in [0,T] ~ Poisson(N*lambda_eff*T)"});
  return out;
}

double center_histogram_tolerance(std::size_t bins, std::size_t n_samples) {
  return 0.9 * std::sqrt(double(bins) / double(n_samples));
}

double total_variation(std::span<const double> samples, double lo, double hi, std::span<const double> expected) {
  if (!(lo < hi) || expected.empty() || samples.empty()) throw std::invalid_argument("total_variation: bad input");
  const std::size_t bins = expected.size();
  std::vector<double> hist(bins, 0.0);
  double overflow = 0.0;
  const double width = (hi - lo) / double(bins);
  for (double x : samples) {
    if (x < lo || x >= hi) {
      overflow += 1.0;
      continue;
    }
    const auto b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
    hist[b] += 1.0;
  }
  const double n = double(samples.size());
  double tv = 0.0, covered = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    tv += std::abs(hist[b] / n - expected[b]);
    covered += expected[b];
  }
  tv += std::abs(overflow / n - std::max(0.0, 1.0 - covered));
  return 0.5 * tv;
}

StatisticRecord center_histogram_test(const GridWaveFunctiond& psi, int particle, double sigma,
                                      std::size_t n_samples, RngStream& rng, std::size_t bins) {
  if (n_samples < 1000) throw std::invalid_argument("center_histogram_test: need at least 1000 samples");
  if (bins < 1) throw std::invalid_argument("center_histogram_test: need at least one bin");
  const auto& spec = psi.spec();
  const double dx = spec.spacing();
  const double lo = spec.x_min - 0.5 * dx;
  const double hi = spec.x_max + 0.5 * dx;
  const double width = (hi - lo) / double(bins);

  // The sampler draws cell j with probability p_j / sum(p) and spreads it
  // uniformly over [x_j - dx/2, x_j + dx/2); bin masses follow by overlap.
  const Eigen::VectorXd p = collapse_center_density(psi, particle, sigma);
  const double total = p.sum();
  std::vector<double> expected(bins, 0.0);
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double a = spec.coordinate(j) - 0.5 * dx;
    const double b = a + dx;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((a - lo) / width)));
    for (std::size_t bin = first; bin < bins; ++bin) {
      const double bl = lo + double(bin) * width;
      const double br = bl + width;
      if (bl >= b) break;
      const double overlap = std::min(b, br) - std::max(a, bl);
      if (overlap > 0.0) expected[bin] += p(j) / total * overlap / dx;
    }
  }

  const GridCenterSampler<double> sampler(psi, particle, sigma);
  std::vector<double> samples(n_samples);
  for (auto& x : samples) x = sampler(rng);
  const double tv = total_variation(samples, lo, hi, expected);
  const double tol = center_histogram_tolerance(bins, n_samples);
  return {"center_histogram_tv", tv, 0.0, tol, kNaN, tv <= tol, "collapse center density (marginal * N(0, sigma^2/2))"};
}

}  // namespace grw
