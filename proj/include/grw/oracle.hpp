#pragma once

#include "grw/branch_state.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

// Reference computations that share no numerical kernels with the engine:
// plain adaptive Simpson quadrature, a SplitMix64 + Box-Muller sampler and a
// hand-written Bayes update. Single-threaded and deliberately slow.
namespace grw::oracle {

struct OneStepResult {
  double total_probability = 0.0;            // integral of p(X) dX
  std::vector<double> expected_posterior;    // integral of p(X) w_i'(X) dX
  double center_mean = 0.0;
  double center_variance = 0.0;
};

/// One collapse on a single-particle branch superposition with point anchors,
/// integrated over every center X by adaptive quadrature (target 1e-10).
/// At most 8 branches. Throws std::runtime_error on non-convergence.
OneStepResult one_step_posterior(const std::vector<double>& weights, const std::vector<double>& anchors,
                                 double sigma);

struct CrosscheckOptions {
  std::size_t cases = 100;
  std::uint64_t seed = 2024;
  double sigma = 1.0;
  double separation = 10.0;   // in units of sigma
  double packet_width = 2e-4; // in units of sigma
};

struct CrosscheckResult {
  double max_discrepancy = 0.0;
  std::size_t cases = 0;
  bool compliant = false;  // separation >= 10 sigma and width <= sigma / 100
};

/// Posterior branch weights from the grid collapse (mass on each side of the
/// midpoint) against the closed-form branch update, for random weights and
/// centers X in [a_1 - 3 sigma, a_2 + 3 sigma].
CrosscheckResult grid_branch_crosscheck(const CrosscheckOptions& options = {});

struct VerdictProbabilities {
  double inside = 0.0;
  double outside = 0.0;
  double partial = 0.0;
  double undefined = 0.0;
  double se_inside = 0.0;
  std::size_t sequences = 0;
};

struct FlashSequenceQuery {
  std::vector<double> weights;   // initial branch weights
  std::vector<double> anchors;   // one particle per branch
  double sigma = 1.0;
  std::size_t flashes = 100;     // k
  double box_lower = -2.0;
  double box_upper = 2.0;
  double theta_f = 0.99;
  std::size_t sequences = 1'000'000;
  std::uint64_t seed = 7;
};

/// Probability of each GRWf verdict for the first k flashes of a fresh
/// preparation, estimated from independent simulated flash sequences.
VerdictProbabilities flash_sequence_probability(const FlashSequenceQuery& query);

/// Query used by the fresh-preparation acceptance criterion: weights
/// (0.99, 0.01), anchors 0 and 10, sigma 1, k = 100, box [-2, 2].
FlashSequenceQuery fresh_preparation_reference_query();

struct ReferenceValues {
  VerdictProbabilities fresh_preparation;
  OneStepResult one_step;  // weights (0.7, 0.3), anchors (0, 10), sigma 1
  CrosscheckResult crosscheck;
};

ReferenceValues compute_reference_values();

/// Structured-text (JSON) reference file.
void write_reference_values(const ReferenceValues& values, const std::filesystem::path& path);
ReferenceValues read_reference_values(const std::filesystem::path& path);

}  // namespace grw::oracle
