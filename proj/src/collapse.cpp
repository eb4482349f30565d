#include "grw/collapse.hpp"

#include <cmath>
#include <stdexcept>

namespace grw {

double sample_waiting_time(int num_particles, double lambda_eff, RngStream& rng) {
  if (num_particles < 1) throw std::invalid_argument("sample_waiting_time: need N >= 1");
  if (!(lambda_eff > 0.0)) throw std::invalid_argument("sample_waiting_time: lambda_eff must be > 0");
  return rng.exponential(static_cast<double>(num_particles) * lambda_eff);
}

BranchState branch_collapse_update(const BranchState& state, int particle, double center, double sigma) {
  if (particle < 0 || particle >= state.num_particles())
    throw std::out_of_range("branch_collapse_update: particle index out of range");
  if (!(sigma > 0.0)) throw std::invalid_argument("branch_collapse_update: sigma must be > 0");
  if (!std::isfinite(center)) throw NumericalError("zero-probability collapse: non-finite center");

  const auto d = (state.anchors().col(particle).array() - center) / sigma;
  Eigen::VectorXd log_posterior = state.log_weights().array() - d.square();
  if (!std::isfinite(log_sum_exp(log_posterior)))
    throw NumericalError("zero-probability collapse: all posterior factors underflow");
  return BranchState::from_log_weights(std::move(log_posterior), state.anchors(), state.labels());
}

double sample_collapse_center(const BranchState& state, int particle, double sigma, RngStream& rng) {
  if (particle < 0 || particle >= state.num_particles())
    throw std::out_of_range("sample_collapse_center: particle index out of range");
  const Eigen::VectorXd w = state.weights();
  double u = rng.uniform() * w.sum();
  Eigen::Index branch = w.size() - 1;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (u < w(i)) {
      branch = i;
      break;
    }
    u -= w(i);
  }
  // Skip trailing zero-weight branches that rounding could otherwise select.
  while (branch > 0 && w(branch) == 0.0) --branch;
  return rng.normal(state.anchors()(branch, particle), sigma / std::sqrt(2.0));
}

}  // namespace grw
