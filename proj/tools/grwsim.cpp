#include "grw/acceptance.hpp"
#include "grw/config.hpp"
#include "grw/ensemble.hpp"
#include "grw/errors.hpp"
#include "grw/io.hpp"
#include "grw/oracle.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kStatisticalFailure = 1, kUsageError = 2, kNumericalError = 3 };

void print_statistics(const std::vector<grw::StatisticRecord>& stats) {
  std::printf("%-32s %14s %12s %14s %10s  %s\n", "statistic", "estimate", "se", "target", "z", "pass");
  for (const auto& r : stats)
    std::printf("%-32s %14.6g %12.4g %14.6g %10.3g  %s\n", r.name.c_str(), r.estimate, r.se, r.target, r.z,
                r.pass ? "yes" : "NO");
}

std::string system_tag(std::size_t trajectory, int marble) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "traj%05zu_m%02d", trajectory, marble);
  return buf;
}

void write_trajectory_logs(const grw::ScenarioConfig& config, std::uint64_t seed, std::size_t count,
                           const fs::path& out) {
  for (std::size_t t = 0; t < count; ++t) {
    for (int m = 0; m < config.n_marbles; ++m) {
      const auto sys = grw::simulate_system(config, seed, t, m);
      const std::string tag = system_tag(t, m);
      grw::write_file_atomically(out / "events" / (tag + ".jsonl"), grw::events_jsonl(sys.record));
      auto flashes = sys.prior_flashes;
      const auto own = grw::flashes_of(sys.record);
      flashes.insert(flashes.end(), own.begin(), own.end());
      grw::write_file_atomically(out / "flashes" / (tag + ".csv"), grw::flashes_csv(flashes));
      for (const auto& snap : sys.record.snapshots) {
        const auto field = std::visit(
            [&](const auto& state) {
              using T = std::decay_t<decltype(state)>;
              if constexpr (std::is_same_v<T, grw::BranchState>)
                return grw::matter_density(state, config.matter_masses(), config.output_grid(), snap.time);
              else
                return grw::matter_density(state, config.matter_masses(), snap.time);
            },
            snap.state);
        grw::write_file_atomically(out / "density" / (tag + "_t" + grw::format_double(snap.time) + ".csv"),
                                   grw::density_csv(field));
      }
      if (!sys.record.ok()) throw grw::NumericalError("trajectory " + tag + ": " + *sys.record.failure);
    }
  }
}

grw::Ontology parse_ontology(const std::string& name) {
  if (name == "grw0") return grw::Ontology::GRW0;
  if (name == "grwf") return grw::Ontology::GRWf;
  return grw::Ontology::GRWm;
}

unsigned resolve_threads(int flag) { return flag > 0 ? static_cast<unsigned>(flag) : grw::default_thread_count(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grwsim: Monte Carlo simulator for GRW spontaneous-collapse dynamics"};
  app.require_subcommand(1);

  std::string config_path, ontology;
  std::uint64_t seed = 0;
  std::size_t trajectories = 1000, log_trajectories = 1;
  int threads = 0;
  std::string out_dir = "results";
  auto* run = app.add_subcommand("run", "Run an ensemble for a scenario config");
  run->add_option("--config", config_path, "Scenario config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--trajectories", trajectories, "Ensemble size (>= 2)");
  run->add_option("--threads", threads, "Worker threads (default: GRWSIM_THREADS or 1)")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--ontology", ontology, "Override the config's ontology")
      ->check(CLI::IsMember({"grw0", "grwf", "grwm"}));
  run->add_option("--log-trajectories", log_trajectories, "Trajectories with full event/flash/density output");

  std::string oracle_out = "reference.json";
  auto* oracle_cmd = app.add_subcommand("oracle", "Recompute the oracle reference values");
  oracle_cmd->add_option("--out", oracle_out, "Reference file to write");

  std::string reference_path, check_out;
  std::vector<int> criteria;
  std::uint64_t check_seed = 20240601;
  int check_threads = 0;
  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  check->add_option("--reference", reference_path, "Reference file from 'oracle' (recomputed if omitted)")
      ->check(CLI::ExistingFile);
  check->add_option("--criteria", criteria, "Subset of criteria to run (1..12)")
      ->delimiter(',')
      ->check(CLI::Range(1, grw::kCriterionCount));
  check->add_option("--seed", check_seed, "Master seed");
  check->add_option("--threads", check_threads, "Worker threads (default: GRWSIM_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  check->add_option("--out", check_out, "Directory for per-criterion summary files");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarize a results directory");
  report->add_option("results", report_dir, "Directory written by 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*run) {
      auto config = grw::load_scenario_config(config_path);
      if (!ontology.empty()) config.ontology = parse_ontology(ontology);
      if (trajectories < 2) throw grw::ConfigError("--trajectories must be >= 2");
      grw::EnsembleOptions options;
      options.trajectories = trajectories;
      options.seed = seed;
      options.threads = resolve_threads(threads);
      const fs::path out(out_dir);

      const auto summary = grw::run_ensemble(config, options);
      grw::write_file_atomically(out / "config.cfg", grw::format_scenario_config(summary.config));
      grw::write_file_atomically(out / "summary.csv", grw::summary_csv(summary.statistics));
      grw::write_file_atomically(out / "provenance.csv", grw::provenance_csv(summary.statistics));
      grw::write_file_atomically(out / "histograms.csv", grw::histograms_csv(summary.histograms));
      write_trajectory_logs(summary.config, seed, std::min(log_trajectories, trajectories), out);

      std::printf("%zu trajectories, seed %llu, %u thread(s)%s\n", summary.n_trajectories,
                  static_cast<unsigned long long>(seed), options.threads,
                  summary.horizon_extended ? ", horizon extended" : "");
      print_statistics(summary.statistics);
      if (summary.failed_trajectories > 0) {
        std::fprintf(stderr, "error: %zu trajectories failed numerically (first: %s)\n", summary.failed_trajectories,
                     summary.first_failure.value_or("?").c_str());
        return kNumericalError;
      }
      return summary.all_pass() ? kOk : kStatisticalFailure;
    }

    if (*oracle_cmd) {
      const auto values = grw::oracle::compute_reference_values();
      grw::oracle::write_reference_values(values, oracle_out);
      std::printf("wrote %s\n", oracle_out.c_str());
      std::printf("fresh preparation: P(inside) = %.6g (se %.2g)\n", values.fresh_preparation.inside,
                  values.fresh_preparation.se_inside);
      std::printf("one step: total probability %.12g, E[w1'] = %.12g\n", values.one_step.total_probability,
                  values.one_step.expected_posterior.at(0));
      std::printf("grid/branch crosscheck: max discrepancy %.3g over %zu cases\n", values.crosscheck.max_discrepancy,
                  values.crosscheck.cases);
      return kOk;
    }

    if (*check) {
      grw::AcceptanceOptions options;
      options.seed = check_seed;
      options.threads = resolve_threads(check_threads);
      options.only = criteria;
      if (!reference_path.empty()) options.reference = grw::oracle::read_reference_values(reference_path);
      if (!check_out.empty()) options.summary_dir = fs::path(check_out);
      const auto results = grw::run_acceptance(options, [](const grw::CriterionResult& r) {
        std::printf("%s\n", grw::format_criterion(r).c_str());
        std::fflush(stdout);
      });
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
      return ok ? kOk : kStatisticalFailure;
    }

    if (*report) {
      const fs::path dir(report_dir);
      if (!fs::is_directory(dir)) throw grw::ConfigError("not a directory: " + report_dir);
      const auto stats = grw::read_summary_csv(dir / "summary.csv");
      print_statistics(stats);
      std::size_t failed = 0;
      for (const auto& r : stats) failed += r.pass ? 0 : 1;
      auto count_files = [&](const char* sub) {
        std::size_t n = 0;
        if (fs::is_directory(dir / sub))
          for (const auto& e : fs::directory_iterator(dir / sub)) n += e.is_regular_file() ? 1 : 0;
        return n;
      };
      std::printf("%zu statistics, %zu failing; %zu event logs, %zu flash files, %zu density snapshots\n",
                  stats.size(), failed, count_files("events"), count_files("flashes"), count_files("density"));
      return failed == 0 ? kOk : kStatisticalFailure;
    }
  } catch (const grw::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsageError;
  } catch (const grw::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumericalError;
  } catch (const grw::InconclusiveError& e) {
    std::fprintf(stderr, "inconclusive: %s\n", e.what());
    return kStatisticalFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}
