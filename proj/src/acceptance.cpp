#include "grw/acceptance.hpp"

#include "grw/collapse.hpp"
#include "grw/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace grw {

namespace {

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

std::string describe(const StatisticRecord& r) {
  return r.name + fmt(" est=%.6g se=%.3g target=%.6g z=%.3g", r.estimate, r.se, r.target, r.z) +
         (r.pass ? "" : " FAIL");
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

GridWaveFunctiond random_state(RngStream& rng, const GridSpecd& spec) {
  const int packets = 1 + static_cast<int>(rng.uniform() * 3.0);
  std::vector<GaussianPacketd> list;
  for (int p = 0; p < packets; ++p) {
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    list.push_back({{-3.0 + 6.0 * rng.uniform()}, 0.2 + 0.8 * rng.uniform(),
                    std::polar(0.2 + rng.uniform(), phase)});
  }
  return make_grid_wavefunction(spec, list);
}

Outcome completeness(const AcceptanceOptions& o) {
  const GridSpecd spec{-15.0, 15.0, 512, 1};
  RngStream rng(o.seed, 1);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto psi = random_state(rng, spec);
    const double sigma = 0.3 + 1.2 * rng.uniform();
    const double integral = collapse_center_density(psi, 0, sigma).sum() * spec.spacing();
    worst = std::max(worst, std::abs(integral - 1.0));
  }
  return {worst < 1e-6, fmt("max |integral - 1| = %.3g over 20 states (tol 1e-6)", worst)};
}

Outcome norm_preservation(const AcceptanceOptions& o) {
  const GridSpecd spec{-15.0, 15.0, 512, 1};
  RngStream rng(o.seed, 2);
  double worst = 0.0;
  int applied = 0;
  for (int chain = 0; chain < 10; ++chain) {
    auto psi = random_state(rng, spec);
    for (int k = 0; k < 1000; ++k, ++applied) {
      const double x = GridCenterSampler<double>(psi, 0, 1.0)(rng);
      psi = apply_collapse_grid(psi, 0, x, 1.0);
      worst = std::max(worst, std::abs(std::sqrt(norm_squared(psi)) - 1.0));
    }
  }
  return {worst < 1e-10, fmt("max |norm - 1| = %.3g over %.0f collapses (tol 1e-10)", worst, applied)};
}

Outcome ensemble_outcome(const AcceptanceOptions& o, int id, const std::vector<std::string>& names,
                         std::optional<oracle::VerdictProbabilities> reference = std::nullopt) {
  const auto ec = ensemble_criterion(id);
  EnsembleOptions eo;
  eo.trajectories = ec.trajectories;
  eo.seed = o.seed + static_cast<std::uint64_t>(id);
  eo.threads = o.threads;
  eo.first_window_reference = reference;
  const auto s = run_ensemble(ec.config, eo);
  if (o.summary_dir)
    write_file_atomically(*o.summary_dir / ("criterion_" + std::to_string(id) + "_summary.csv"),
                          summary_csv(s.statistics));
  Outcome out{s.failed_trajectories == 0, ""};
  for (const auto& name : names) {
    const auto& r = s.statistic(name);
    out.pass = out.pass && r.pass;
    out.detail += (out.detail.empty() ? "" : "; ") + describe(r);
  }
  if (s.failed_trajectories > 0) out.detail += fmt("; %.0f failed trajectories", double(s.failed_trajectories));
  if (s.horizon_extended) out.detail += "; horizon extended";
  return out;
}

Outcome center_sampling(const AcceptanceOptions& o) {
  const GridSpecd spec{-10.0, 20.0, 512, 1};
  const std::vector<GaussianPacketd> packets{{{0.0}, 0.5, std::sqrt(0.6)}, {{3.0}, 0.5, std::sqrt(0.4)}};
  const auto psi = make_grid_wavefunction(spec, packets);
  RngStream rng(o.seed, 7);
  const auto r = center_histogram_test(psi, 0, 1.0, 100000, rng, 50);
  return {r.estimate <= 0.02, fmt("TV = %.4g with 50 bins, 1e5 samples (tol 0.02)", r.estimate)};
}

Outcome crosscheck(const AcceptanceOptions&) {
  const auto r = oracle::grid_branch_crosscheck();
  return {r.compliant && r.cases >= 100 && r.max_discrepancy < 1e-6,
          fmt("max discrepancy %.3g over %.0f compliant cases (tol 1e-6)", r.max_discrepancy, double(r.cases))};
}

Outcome tail_fact(const AcceptanceOptions&) {
  double worst_branch = 0.0, worst_raster = 0.0, worst_grid = 0.0;
  for (double c1 : {0.5, 0.7, 0.9, 0.99, 0.999999}) {
    ScenarioConfig c;
    c.c1_sq = c1;
    for (int n : {1, 3}) {
      c.particles = n;
      const auto state = std::get<BranchState>(make_initial_state(c));
      const double out = 1.0 - mass_fraction_in_region(state, c.matter_masses(), c.box);
      worst_branch = std::max(worst_branch, std::abs(out - (1.0 - c1)));
      const auto field = matter_density(state, c.matter_masses(), c.output_grid());
      worst_raster = std::max(worst_raster, std::abs(1.0 - mass_fraction_in_region(field, c.box) - (1.0 - c1)));
    }
    c.backend = Backend::Grid;
    for (int n : {1, 2}) {
      c.particles = n;
      c.grid_points = n == 1 ? 512 : 256;
      c.packet_width = n == 1 ? 0.2 : 0.3;
      const auto psi = std::get<GridWaveFunctiond>(make_initial_state(c));
      const double out = 1.0 - mass_fraction_in_region(matter_density(psi, c.matter_masses()), c.box);
      worst_grid = std::max(worst_grid, std::abs(out - (1.0 - c1)));
    }
  }
  return {worst_branch < 1e-9 && worst_raster < 1e-9 && worst_grid < 1e-6,
          fmt("max error branch %.3g, rasterized %.3g (tol 1e-9), grid %.3g (tol 1e-6)", worst_branch, worst_raster,
              worst_grid)};
}

Outcome fresh_grwf(const AcceptanceOptions& o) {
  const auto ref = o.reference ? o.reference->fresh_preparation
                               : oracle::flash_sequence_probability(oracle::fresh_preparation_reference_query());
  auto out = ensemble_outcome(o, 11, {"grwf_first_window_inside", "initial_undefined_frequency"}, ref);
  out.detail += fmt("; oracle p* = %.5g (se %.2g)", ref.inside, ref.se_inside);
  return out;
}

Outcome determinism(const AcceptanceOptions& o) {
  const unsigned other = std::max(4u, o.threads);
  std::string detail;
  bool pass = true;
  for (int id : {3, 5, 6}) {
    const auto ec = ensemble_criterion(id);
    const auto a = summary_csv(run_ensemble(ec.config, ec.trajectories, o.seed + 100, 1).statistics);
    const auto b = summary_csv(run_ensemble(ec.config, ec.trajectories, o.seed + 100, other).statistics);
    pass = pass && a == b;
    detail += (detail.empty() ? "" : ", ") + std::string("criterion ") + std::to_string(id) +
              (a == b ? " identical" : " DIFFERS");
  }
  return {pass, detail + " (threads 1 vs " + std::to_string(other) + ")"};
}

struct Criterion {
  int id;
  const char* name;
  double budget;
  std::function<Outcome(const AcceptanceOptions&)> run;
};

std::vector<Criterion> criteria() {
  return {
      {1, "completeness", 1.0, completeness},
      {2, "norm preservation", 10.0, norm_preservation},
      {3, "martingale", 60.0, [](const auto& o) { return ensemble_outcome(o, 3, {"martingale_mean_w1"}); }},
      {4, "branch selection", 120.0,
       [](const auto& o) { return ensemble_outcome(o, 4, {"selection_frequency_branch1"}); }},
      {5, "marble census", 120.0,
       [](const auto& o) { return ensemble_outcome(o, 5, {"all_inside_frequency", "mean_inside_count"}); }},
      {6, "poisson flashes", 60.0,
       [](const auto& o) { return ensemble_outcome(o, 6, {"poisson_mean_flash_count", "poisson_chi2_pvalue"}); }},
      {7, "center sampling", 30.0, center_sampling},
      {8, "grid/branch equivalence", 60.0, crosscheck},
      {9, "matter-density tail fraction", 1.0, tail_fact},
      {10, "resurrection frequency", 300.0,
       [](const auto& o) { return ensemble_outcome(o, 10, {"resurrection_frequency"}); }},
      {11, "fresh-preparation flash verdicts", 120.0, fresh_grwf},
      {12, "thread-count determinism", 600.0, determinism},
  };
}

}  // namespace

EnsembleCriterion ensemble_criterion(int id) {
  ScenarioConfig c;
  c.backend = Backend::Branch;
  c.ontology = Ontology::GRWm;
  c.lambda_eff = 1.0;
  c.sigma = 1.0;
  switch (id) {
    case 3:
    case 4:
      c.kind = ScenarioKind::Cat;
      c.c1_sq = 0.7;
      c.total_time = 50.0;
      c.martingale_time = 20.0;
      return {c, 10000};
    case 5:
      c.kind = ScenarioKind::Marbles;
      c.n_marbles = 5;
      c.c1_sq = 0.9;
      c.total_time = 50.0;
      return {c, 10000};
    case 6:
      c.kind = ScenarioKind::Cat;
      c.particles = 2;
      c.lambda_eff = 0.5;
      c.total_time = 10.0;
      return {c, 10000};
    case 10:
      c.kind = ScenarioKind::Tail;
      c.c1_sq = 0.99;
      c.total_time = 50.0;
      return {c, 100000};
    case 11:
      c.kind = ScenarioKind::Cat;
      c.ontology = Ontology::GRWf;
      c.history = History::FreshPreparation;
      c.c1_sq = 0.99;
      c.box = Region(-2.0, 2.0);
      c.first_window_flashes = 100;
      c.total_time = 50.0;
      return {c, 10000};
    default:
      throw std::out_of_range("criterion " + std::to_string(id) + " is not ensemble-based");
  }
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  for (int id : options.only)
    if (id < 1 || id > kCriterionCount) throw std::out_of_range("no acceptance criterion " + std::to_string(id));
  std::vector<CriterionResult> results;
  for (const auto& c : criteria()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), c.id) == options.only.end())
      continue;
    CriterionResult r{c.id, c.name, false, "", 0.0, c.budget};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome out = c.run(options);
      r.pass = out.pass;
      r.detail = out.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_seconds) {
      r.pass = false;
      r.detail += "; over time budget";
    }
    if (on_result) on_result(r);
    results.push_back(r);
  }
  return results;
}

std::string format_criterion(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %2d %s: ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
  char tail[96];
  std::snprintf(tail, sizeof tail, " [%.2f s / %.0f s]", r.seconds, r.budget_seconds);
  return head + r.detail + tail;
}

}  // namespace grw
