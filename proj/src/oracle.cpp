#include "grw/oracle.hpp"

#include "grw/collapse.hpp"
#include "grw/grid_wavefunction.hpp"
#include "grw/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace grw::oracle {

namespace {

// Adaptive Simpson on [a, b] to absolute tolerance eps.
class Simpson {
 public:
  explicit Simpson(std::function<double(double)> f) : f_(std::move(f)) {}

  double integrate(double a, double b, double eps) {
    const double m = 0.5 * (a + b);
    const double fa = f_(a), fb = f_(b), fm = f_(m);
    return refine(a, b, fa, fm, fb, whole(a, b, fa, fm, fb), eps, 0);
  }

 private:
  static double whole(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

  double refine(double a, double b, double fa, double fm, double fb, double s, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f_(lm), frm = f_(rm);
    const double left = whole(a, m, fa, flm, fm);
    const double right = whole(m, b, fm, frm, fb);
    const double delta = left + right - s;
    if (depth >= 8 && std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    if (depth >= 60) throw std::runtime_error("oracle quadrature did not converge");
    return refine(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) + refine(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
  }

  std::function<double(double)> f_;
};

// Splits [lo, hi] at every anchor and midpoint so each panel holds at most one
// peak, then sums the panel integrals.
double integrate_over_centers(const std::function<double(double)>& f, std::vector<double> breaks, double eps) {
  std::sort(breaks.begin(), breaks.end());
  Simpson simpson(f);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i + 1] > breaks[i]) total += simpson.integrate(breaks[i], breaks[i + 1], eps);
  return total;
}

struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

}  // namespace

OneStepResult one_step_posterior(const std::vector<double>& weights, const std::vector<double>& anchors,
                                 double sigma) {
  if (weights.empty() || weights.size() != anchors.size() || weights.size() > 8)
    throw std::invalid_argument("one_step_posterior: need 1..8 branches with one anchor each");
  if (!(sigma > 0.0)) throw std::invalid_argument("one_step_posterior: sigma must be > 0");
  const std::size_t b = weights.size();
  const double s2 = sigma * sigma;
  const double norm = 1.0 / std::sqrt(std::numbers::pi * s2);

  auto center_density = [&](double x) {
    double p = 0.0;
    for (std::size_t j = 0; j < b; ++j) p += weights[j] * norm * std::exp(-(x - anchors[j]) * (x - anchors[j]) / s2);
    return p;
  };
  auto posterior = [&](double x, std::size_t i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b; ++j)
      if (weights[j] > 0.0) dmin = std::min(dmin, (x - anchors[j]) * (x - anchors[j]));
    double z = 0.0;
    for (std::size_t j = 0; j < b; ++j) z += weights[j] * std::exp(-((x - anchors[j]) * (x - anchors[j]) - dmin) / s2);
    return weights[i] * std::exp(-((x - anchors[i]) * (x - anchors[i]) - dmin) / s2) / z;
  };

  std::vector<double> breaks{*std::min_element(anchors.begin(), anchors.end()) - 12.0 * sigma,
                             *std::max_element(anchors.begin(), anchors.end()) + 12.0 * sigma};
  for (std::size_t i = 0; i < b; ++i) {
    breaks.push_back(anchors[i]);
    for (std::size_t j = i + 1; j < b; ++j) breaks.push_back(0.5 * (anchors[i] + anchors[j]));
  }

  const double eps = 1e-13;
  OneStepResult r;
  r.total_probability = integrate_over_centers(center_density, breaks, eps);
  for (std::size_t i = 0; i < b; ++i)
    r.expected_posterior.push_back(
        integrate_over_centers([&](double x) { return center_density(x) * posterior(x, i); }, breaks, eps));
  r.center_mean = integrate_over_centers([&](double x) { return x * center_density(x); }, breaks, eps);
  const double second = integrate_over_centers([&](double x) { return x * x * center_density(x); }, breaks, eps);
  r.center_variance = second - r.center_mean * r.center_mean;
  return r;
}

CrosscheckResult grid_branch_crosscheck(const CrosscheckOptions& options) {
  const double sigma = options.sigma;
  const double a1 = 0.0;
  const double a2 = options.separation * sigma;
  const double width = options.packet_width * sigma;
  const double dx = width / 2.5;
  const double lo = std::min(a1, a2) - std::max(sigma, 40.0 * width);
  const double hi = std::max(a1, a2) + std::max(sigma, 40.0 * width);
  const auto points = static_cast<Eigen::Index>(std::ceil((hi - lo) / dx)) + 1;
  const GridSpecd spec{lo, hi, points, 1};
  const double midpoint = 0.5 * (a1 + a2);

  CrosscheckResult result;
  result.compliant = options.separation >= 10.0 && options.packet_width <= 0.01;
  SplitMix64 rng{options.seed};
  Eigen::MatrixXd anchors(2, 1);
  anchors << a1, a2;
  for (std::size_t c = 0; c < options.cases; ++c) {
    const double w1 = 0.01 + 0.98 * rng.uniform();
    const double x = (a1 - 3.0 * sigma) + (a2 - a1 + 6.0 * sigma) * rng.uniform();

    const std::vector<GaussianPacketd> packets{{{a1}, width, std::sqrt(w1)}, {{a2}, width, std::sqrt(1.0 - w1)}};
    const auto post = apply_collapse_grid(make_grid_wavefunction(spec, packets), 0, x, sigma);
    double left = 0.0, total = 0.0;
    for (Eigen::Index j = 0; j < points; ++j) {
      const double m = std::norm(post.amplitudes()(j));
      total += m;
      if (spec.coordinate(j) < midpoint) left += m;
    }
    const BranchState branch({w1, 1.0 - w1}, anchors, {"1", "2"});
    const double w1_branch = branch_collapse_update(branch, 0, x, sigma).weight(0);
    result.max_discrepancy = std::max(result.max_discrepancy, std::abs(left / total - w1_branch));
    ++result.cases;
  }
  return result;
}

VerdictProbabilities flash_sequence_probability(const FlashSequenceQuery& q) {
  if (q.weights.empty() || q.weights.size() != q.anchors.size())
    throw std::invalid_argument("flash_sequence_probability: need one anchor per weight");
  if (q.flashes > 1000) throw std::invalid_argument("flash_sequence_probability: at most 1000 flashes");
  if (q.sequences == 0) throw std::invalid_argument("flash_sequence_probability: need sequences > 0");

  VerdictProbabilities out;
  out.sequences = q.sequences;
  if (q.flashes == 0) {
    out.undefined = 1.0;
    return out;
  }

  const std::size_t b = q.weights.size();
  const double spread = q.sigma / std::sqrt(2.0);
  SplitMix64 rng{q.seed};
  std::vector<double> log_w(b), prob(b);
  std::size_t inside_count = 0, outside_count = 0, partial_count = 0;

  for (std::size_t s = 0; s < q.sequences; ++s) {
    for (std::size_t i = 0; i < b; ++i) log_w[i] = q.weights[i] > 0.0 ? std::log(q.weights[i]) : -INFINITY;
    std::size_t in_box = 0;
    for (std::size_t f = 0; f < q.flashes; ++f) {
      const double top = *std::max_element(log_w.begin(), log_w.end());
      double z = 0.0;
      for (std::size_t i = 0; i < b; ++i) z += (prob[i] = std::exp(log_w[i] - top));
      double u = rng.uniform() * z;
      std::size_t pick = 0;
      while (pick + 1 < b && u >= prob[pick]) u -= prob[pick++];
      const double x = q.anchors[pick] + spread * rng.gaussian();
      if (x >= q.box_lower && x <= q.box_upper) ++in_box;
      for (std::size_t i = 0; i < b; ++i) log_w[i] -= (x - q.anchors[i]) * (x - q.anchors[i]) / (q.sigma * q.sigma);
    }
    const double fraction = double(in_box) / double(q.flashes);
    if (fraction >= q.theta_f && fraction > 0.5)
      ++inside_count;
    else if (fraction <= 1.0 - q.theta_f && fraction < 0.5)
      ++outside_count;
    else
      ++partial_count;
  }
  const double n = double(q.sequences);
  out.inside = double(inside_count) / n;
  out.outside = double(outside_count) / n;
  out.partial = double(partial_count) / n;
  out.se_inside = std::sqrt(out.inside * (1.0 - out.inside) / n);
  return out;
}

FlashSequenceQuery fresh_preparation_reference_query() {
  FlashSequenceQuery q;
  q.weights = {0.99, 0.01};
  q.anchors = {0.0, 10.0};
  q.sigma = 1.0;
  q.flashes = 100;
  q.box_lower = -2.0;
  q.box_upper = 2.0;
  q.theta_f = 0.99;
  q.sequences = 1'000'000;
  q.seed = 7;
  return q;
}

ReferenceValues compute_reference_values() {
  ReferenceValues v;
  v.fresh_preparation = flash_sequence_probability(fresh_preparation_reference_query());
  v.one_step = one_step_posterior({0.7, 0.3}, {0.0, 10.0}, 1.0);
  v.crosscheck = grid_branch_crosscheck();
  return v;
}

void write_reference_values(const ReferenceValues& v, const std::filesystem::path& path) {
  const auto q = fresh_preparation_reference_query();
  nlohmann::ordered_json j;
  j["fresh_preparation"] = {{"weights", q.weights},     {"anchors", q.anchors},         {"sigma", q.sigma},
                            {"flashes", q.flashes},     {"box", {q.box_lower, q.box_upper}},
                            {"theta_f", q.theta_f},     {"sequences", v.fresh_preparation.sequences},
                            {"p_inside", v.fresh_preparation.inside},
                            {"p_outside", v.fresh_preparation.outside},
                            {"p_partial", v.fresh_preparation.partial},
                            {"p_undefined", v.fresh_preparation.undefined},
                            {"se_inside", v.fresh_preparation.se_inside}};
  j["one_step"] = {{"weights", {0.7, 0.3}},
                   {"anchors", {0.0, 10.0}},
                   {"sigma", 1.0},
                   {"total_probability", v.one_step.total_probability},
                   {"expected_posterior", v.one_step.expected_posterior},
                   {"center_mean", v.one_step.center_mean},
                   {"center_variance", v.one_step.center_variance}};
  j["crosscheck"] = {{"cases", v.crosscheck.cases},
                     {"compliant", v.crosscheck.compliant},
                     {"max_discrepancy", v.crosscheck.max_discrepancy}};
  write_file_atomically(path, j.dump(2) + "\n");
}

ReferenceValues read_reference_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    ReferenceValues v;
    const auto& f = j.at("fresh_preparation");
    v.fresh_preparation.inside = f.at("p_inside").get<double>();
    v.fresh_preparation.outside = f.at("p_outside").get<double>();
    v.fresh_preparation.partial = f.at("p_partial").get<double>();
    v.fresh_preparation.undefined = f.at("p_undefined").get<double>();
    v.fresh_preparation.se_inside = f.at("se_inside").get<double>();
    v.fresh_preparation.sequences = f.at("sequences").get<std::size_t>();
    const auto& o = j.at("one_step");
    v.one_step.total_probability = o.at("total_probability").get<double>();
    v.one_step.expected_posterior = o.at("expected_posterior").get<std::vector<double>>();
    v.one_step.center_mean = o.at("center_mean").get<double>();
    v.one_step.center_variance = o.at("center_variance").get<double>();
    const auto& c = j.at("crosscheck");
    v.crosscheck.cases = c.at("cases").get<std::size_t>();
    v.crosscheck.compliant = c.at("compliant").get<bool>();
    v.crosscheck.max_discrepancy = c.at("max_discrepancy").get<double>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed reference file " + path.string() + ": " + e.what());
  }
}

}  // namespace grw::oracle
