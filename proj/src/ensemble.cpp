#include "grw/ensemble.hpp"

#include "grw/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace grw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Plan {
  ScenarioConfig config;
  SystemState initial;
  GrwParams params;
  RunOptions options;
  std::vector<double> sampling_times;
  double initial_inside_weight;
  bool first_window;
};

Plan make_plan(const ScenarioConfig& config) {
  config.validate();
  Plan p{config,
         make_initial_state(config),
         config.grw_params(),
         trajectory_plan(config),
         {},
         0.0,
         config.ontology == Ontology::GRWf && config.history == History::FreshPreparation &&
             config.backend == Backend::Branch};
  if (config.kind == ScenarioKind::Tail) p.sampling_times = resurrection_sampling_times(config);
  p.initial_inside_weight = weight_summary(p.initial, config.box).at(0);
  return p;
}

SimulatedSystem simulate(const Plan& plan, std::uint64_t seed, std::size_t index) {
  RngStream history(seed, stream_id(StreamPurpose::History, index));
  auto prior = seed_prior_flashes(plan.config, history);
  RngStream dynamics(seed, stream_id(StreamPurpose::Dynamics, index));
  return {std::move(prior), run_trajectory(plan.initial, plan.params, dynamics, plan.options)};
}

struct SystemDigest {
  std::uint64_t flashes = 0;
  double w_martingale = 0.0;
  double w_final = 0.0;
  double max_weight = 0.0;
  int winner = 0;
  Verdict final_verdict = Verdict::Undefined;
};

struct MemberDigest {
  std::vector<SystemDigest> systems;
  std::size_t failures = 0;
  std::optional<std::string> failure;
  bool flip = false;
  std::optional<Verdict> initial_verdict;
  std::optional<Verdict> first_window_verdict;
  std::exception_ptr error;
};

Verdict first_window_verdict(const Plan& plan, std::uint64_t seed, std::size_t member) {
  const auto& c = plan.config;
  GrwParams params = plan.params;
  const double k = double(c.first_window_flashes);
  params.total_time = std::max(c.total_time, 20.0 * (k + 10.0) / c.collapse_rate());
  RunOptions options;
  options.max_events = c.first_window_flashes;
  RngStream rng(seed, stream_id(StreamPurpose::FirstWindow, member));
  const auto record = run_trajectory(plan.initial, params, rng, options);
  if (!record.ok()) throw NumericalError(*record.failure);
  const double inf = std::numeric_limits<double>::infinity();
  return classify_grwf(flashes_of(record), c.box, {-inf, inf}, c.theta_f).verdict;
}

MemberDigest digest_member(const Plan& plan, std::uint64_t seed, std::size_t member) {
  MemberDigest d;
  const auto& c = plan.config;
  const auto n = static_cast<std::size_t>(c.n_marbles);
  for (std::size_t m = 0; m < n; ++m) {
    const SimulatedSystem s = simulate(plan, seed, member * n + m);
    if (!s.record.ok()) {
      ++d.failures;
      if (!d.failure) d.failure = *s.record.failure;
      continue;
    }
    SystemDigest sd;
    sd.flashes = s.record.events.size();
    sd.w_martingale = weight_summary(state_at(s.record, c.martingale_at()), c.box).at(0);
    const auto final_weights = weight_summary(s.record.final_state, c.box);
    const auto top = std::max_element(final_weights.begin(), final_weights.end());
    sd.w_final = final_weights.at(0);
    sd.max_weight = *top;
    sd.winner = static_cast<int>(top - final_weights.begin());

    const Classifier classify = make_classifier(c, s.prior_flashes);
    sd.final_verdict = classify(s.record, c.total_time).verdict;
    if (m == 0) {
      d.initial_verdict = classify(s.record, 0.0).verdict;
      if (c.kind == ScenarioKind::Tail)
        d.flip = detect_resurrection(s.record, classify, plan.sampling_times).size() % 2 == 1;
    }
    d.systems.push_back(sd);
  }
  if (plan.first_window && d.failures == 0) d.first_window_verdict = first_window_verdict(plan, seed, member);
  return d;
}

std::vector<MemberDigest> run_members(const Plan& plan, const EnsembleOptions& options) {
  std::vector<MemberDigest> digests(options.trajectories);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < digests.size(); i = next++) {
      try {
        digests[i] = digest_member(plan, options.seed, i);
      } catch (...) {
        digests[i].error = std::current_exception();
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, digests.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& d : digests)
    if (d.error) std::rethrow_exception(d.error);
  return digests;
}

Histogram count_histogram(std::string name, const std::vector<std::uint64_t>& values, std::size_t min_bins) {
  Histogram h{std::move(name), 0.0, 1.0, {}};
  std::uint64_t top = 0;
  for (auto v : values) top = std::max(top, v);
  h.counts.assign(std::max<std::size_t>(min_bins, static_cast<std::size_t>(top) + 1), 0);
  for (auto v : values) ++h.counts[static_cast<std::size_t>(v)];
  return h;
}

Histogram unit_histogram(std::string name, const std::vector<double>& values, std::size_t bins) {
  Histogram h{std::move(name), 0.0, 1.0 / double(bins), std::vector<std::uint64_t>(bins, 0)};
  for (double v : values) {
    const auto b = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * double(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

EnsembleSummary fold(const Plan& plan, const std::vector<MemberDigest>& digests, const EnsembleOptions& options) {
  const auto& c = plan.config;
  EnsembleSummary s;
  s.config = c;
  s.n_trajectories = digests.size();

  std::vector<std::uint64_t> flash_counts;
  std::vector<double> w_mart, w_final, max_weights;
  std::vector<int> winners;
  std::vector<std::uint64_t> inside_counts;
  std::size_t members_ok = 0, flips = 0, all_inside = 0, initial_undefined = 0, fw_inside = 0, fw_total = 0;
  for (const auto& d : digests) {
    s.failed_trajectories += d.failures;
    if (d.failure && !s.first_failure) s.first_failure = d.failure;
    for (const auto& sd : d.systems) {
      flash_counts.push_back(sd.flashes);
      w_mart.push_back(sd.w_martingale);
      w_final.push_back(sd.w_final);
      max_weights.push_back(sd.max_weight);
      winners.push_back(sd.winner);
    }
    if (d.failures > 0) continue;
    ++members_ok;
    if (d.flip) ++flips;
    if (d.initial_verdict == Verdict::Undefined) ++initial_undefined;
    if (d.first_window_verdict) {
      ++fw_total;
      if (*d.first_window_verdict == Verdict::Inside) ++fw_inside;
    }
    const auto inside = static_cast<std::uint64_t>(std::count_if(
        d.systems.begin(), d.systems.end(), [](const SystemDigest& sd) { return sd.final_verdict == Verdict::Inside; }));
    inside_counts.push_back(inside);
    if (inside == static_cast<std::uint64_t>(c.n_marbles)) ++all_inside;
  }
  if (flash_counts.size() < 2 || members_ok < 2)
    throw NumericalError("ensemble: fewer than two trajectories completed");

  const Thresholds thresholds{c.z_max, c.p_min};
  const double w1 = plan.initial_inside_weight;
  auto& out = s.statistics;

  const double expected_flashes = c.collapse_rate() * c.total_time;
  try {
    const auto poisson = poisson_flash_test(flash_counts, expected_flashes, thresholds);
    out.insert(out.end(), poisson.begin(), poisson.end());
  } catch (const std::invalid_argument&) {
    const std::vector<double> as_real(flash_counts.begin(), flash_counts.end());
    out.push_back(mean_z_test("poisson_mean_flash_count", as_real, expected_flashes, c.z_max,
                              "flash count in [0,T] has mean N*lambda_eff*T"));
  }
  out.push_back(martingale_test(w_mart, w1, c.z_max));
  out.push_back(selection_frequency_test(winners, max_weights, w1, c.z_max));

  if (c.kind == ScenarioKind::Tail)
    out.push_back(proportion_z_test("resurrection_frequency", flips, members_ok, std::min(w1, 1.0 - w1), c.z_max,
                                    "net verdict flip iff the limit branch differs from the initial majority branch"));

  if (c.kind == ScenarioKind::Marbles) {
    const int n = c.n_marbles;
    out.push_back(proportion_z_test("all_inside_frequency", all_inside, members_ok, std::pow(w1, n), c.z_max,
                                    "all n marbles inside with probability |c1|^(2n)"));
    const std::vector<double> counts_real(inside_counts.begin(), inside_counts.end());
    out.push_back(mean_z_test("mean_inside_count", counts_real, double(n) * w1, c.z_max,
                              "inside count ~ Binomial(n, |c1|^2)"));
    const auto hist = count_histogram("inside_count", inside_counts, static_cast<std::size_t>(n) + 1);
    try {
      const auto chi = chi_square_counts(hist.counts, binomial_pmf(static_cast<std::size_t>(n), w1), 2);
      out.push_back({"census_chi2_pvalue", chi.p_value, 0.0, c.p_min, kNaN, chi.p_value >= c.p_min,
                     "inside count ~ Binomial(n, |c1|^2)"});
    } catch (const std::invalid_argument&) {
    }
    s.histograms.push_back(hist);
  }

  if (c.ontology == Ontology::GRWf && c.history == History::FreshPreparation)
    out.push_back(proportion_z_test("initial_undefined_frequency", initial_undefined, members_ok, 1.0, c.z_max,
                                    "no flashes before a fresh preparation"));

  if (plan.first_window && fw_total >= 2) {
    oracle::VerdictProbabilities ref;
    if (options.first_window_reference) {
      ref = *options.first_window_reference;
    } else {
      oracle::FlashSequenceQuery q;
      q.weights = {w1, 1.0 - w1};
      q.anchors = {c.anchor_inside, c.anchor_outside};
      q.sigma = c.sigma;
      q.flashes = c.first_window_flashes;
      q.box_lower = c.box.lower();
      q.box_upper = c.box.upper();
      q.theta_f = c.theta_f;
      q.sequences = c.oracle_sequences;
      ref = oracle::flash_sequence_probability(q);
    }
    const double n = double(fw_total);
    const double estimate = double(fw_inside) / n;
    const double se = std::sqrt(ref.inside * (1.0 - ref.inside) / n + ref.se_inside * ref.se_inside);
    StatisticRecord r{"grwf_first_window_inside", estimate, se, ref.inside, 0.0, false,
                      "first-window Inside probability from independent flash-sequence sampling"};
    if (se > 0.0) {
      r.z = (estimate - ref.inside) / se;
      r.pass = std::abs(r.z) <= c.z_max;
    } else {
      r.z = estimate == ref.inside ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), estimate - ref.inside);
      r.pass = estimate == ref.inside;
    }
    out.push_back(r);
  }

  out.push_back({"failed_trajectories", double(s.failed_trajectories), 0.0, 0.0, s.failed_trajectories == 0 ? 0.0 : kNaN,
                 s.failed_trajectories == 0, "numerically failed runs"});

  s.histograms.insert(s.histograms.begin(), count_histogram("flash_count", flash_counts, 1));
  s.histograms.push_back(unit_histogram("w1_martingale_time", w_mart, 20));
  s.histograms.push_back(unit_histogram("w1_final", w_final, 20));
  return s;
}

}  // namespace

bool EnsembleSummary::all_pass() const {
  return failed_trajectories == 0 &&
         std::all_of(statistics.begin(), statistics.end(), [](const StatisticRecord& r) { return r.pass; });
}

const StatisticRecord& EnsembleSummary::statistic(const std::string& name) const {
  for (const auto& r : statistics)
    if (r.name == name) return r;
  throw std::out_of_range("no statistic named " + name);
}

std::uint64_t stream_id(StreamPurpose purpose, std::size_t index) {
  if (index >= (std::size_t{1} << 56)) throw std::out_of_range("stream_id: index too large");
  return (static_cast<std::uint64_t>(purpose) << 56) | static_cast<std::uint64_t>(index);
}

SimulatedSystem simulate_system(const ScenarioConfig& config, std::uint64_t seed, std::size_t trajectory, int marble) {
  if (marble < 0 || marble >= config.n_marbles) throw std::out_of_range("simulate_system: marble index out of range");
  const Plan plan = make_plan(config);
  return simulate(plan, seed, trajectory * static_cast<std::size_t>(config.n_marbles) + static_cast<std::size_t>(marble));
}

EnsembleSummary run_ensemble(const ScenarioConfig& config, const EnsembleOptions& options) {
  if (options.trajectories < 2) throw std::invalid_argument("run_ensemble: need at least two trajectories");
  Plan plan = make_plan(config);
  try {
    return fold(plan, run_members(plan, options), options);
  } catch (const InconclusiveError&) {
    if (!options.auto_extend) throw;
  }
  ScenarioConfig longer = config;
  longer.total_time *= 2.0;
  longer.martingale_time = config.martingale_at();
  plan = make_plan(longer);
  EnsembleSummary s = fold(plan, run_members(plan, options), options);
  s.horizon_extended = true;
  return s;
}

EnsembleSummary run_ensemble(const ScenarioConfig& config, std::size_t n_traj, std::uint64_t seed, unsigned threads) {
  EnsembleOptions options;
  options.trajectories = n_traj;
  options.seed = seed;
  options.threads = threads;
  return run_ensemble(config, options);
}

unsigned default_thread_count() {
  const char* env = std::getenv("GRWSIM_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 1024) return 1;
  return static_cast<unsigned>(v);
}

}  // namespace grw
