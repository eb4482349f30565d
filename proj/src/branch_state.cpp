#include "grw/branch_state.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace grw {

Region::Region(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!(lower < upper)) throw std::invalid_argument("Region: lower must be < upper");
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

BranchState::BranchState(const std::vector<double>& weights, Eigen::MatrixXd anchors,
                         std::vector<std::string> labels)
    : anchors_(std::move(anchors)), labels_(std::move(labels)) {
  if (weights.empty()) throw std::invalid_argument("BranchState: no branches");
  if (static_cast<Eigen::Index>(weights.size()) != anchors_.rows() || weights.size() != labels_.size())
    throw std::invalid_argument("BranchState: weights, anchors and labels disagree in length");
  if (anchors_.cols() < 1) throw std::invalid_argument("BranchState: need at least one particle");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("BranchState: weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("BranchState: weights must sum to 1");
  log_weights_.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) log_weights_(static_cast<Eigen::Index>(i)) = std::log(weights[i]);
  normalize_log_weights();
}

BranchState BranchState::from_log_weights(Eigen::VectorXd log_weights, Eigen::MatrixXd anchors,
                                          std::vector<std::string> labels) {
  if (log_weights.size() == 0) throw std::invalid_argument("BranchState: no branches");
  if (log_weights.size() != anchors.rows() || static_cast<std::size_t>(log_weights.size()) != labels.size())
    throw std::invalid_argument("BranchState: weights, anchors and labels disagree in length");
  BranchState s;
  s.log_weights_ = std::move(log_weights);
  s.anchors_ = std::move(anchors);
  s.labels_ = std::move(labels);
  s.normalize_log_weights();
  return s;
}

void BranchState::normalize_log_weights() {
  for (double lw : log_weights_)
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("BranchState: invalid log-weight");
  const double z = log_sum_exp(log_weights_);
  if (!std::isfinite(z)) throw std::invalid_argument("BranchState: all weights are zero");
  log_weights_.array() -= z;
}

double BranchState::weight(Eigen::Index branch) const { return std::exp(log_weights_(branch)); }

Eigen::Index BranchState::find(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<Eigen::Index>(i);
  return -1;
}

double BranchState::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < anchors_.rows(); ++i)
    for (Eigen::Index j = i + 1; j < anchors_.rows(); ++j)
      best = std::min(best, (anchors_.row(i) - anchors_.row(j)).cwiseAbs().minCoeff());
  return best;
}

std::vector<std::pair<std::string, double>> branch_weights(const BranchState& state) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(static_cast<std::size_t>(state.num_branches()));
  const Eigen::VectorXd w = state.weights();
  for (Eigen::Index i = 0; i < w.size(); ++i) out.emplace_back(state.labels()[static_cast<std::size_t>(i)], w(i));
  return out;
}

}  // namespace grw
