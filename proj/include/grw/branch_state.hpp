#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace grw {

/// 1-D interval [lower, upper]; "the box".
class Region {
 public:
  Region(double lower, double upper);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool contains(double x) const { return x >= lower_ && x <= upper_; }

 private:
  double lower_;
  double upper_;
};

/// Finitely many macroscopically distinct branches with point anchors.
///
/// Weights are stored as normalized log-weights so that a branch hit by many
/// far-away collapses keeps a strictly positive (if unrepresentable as a
/// double) weight. `anchors(i, k)` is the position of particle k in branch i.
class BranchState {
 public:
  BranchState(const std::vector<double>& weights, Eigen::MatrixXd anchors, std::vector<std::string> labels);

  /// Builds from unnormalized log-weights; -inf marks an exactly-zero branch.
  static BranchState from_log_weights(Eigen::VectorXd log_weights, Eigen::MatrixXd anchors,
                                      std::vector<std::string> labels);

  Eigen::Index num_branches() const { return log_weights_.size(); }
  int num_particles() const { return static_cast<int>(anchors_.cols()); }

  Eigen::VectorXd weights() const { return log_weights_.array().exp().matrix(); }
  double weight(Eigen::Index branch) const;
  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  const Eigen::MatrixXd& anchors() const { return anchors_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Index of the branch carrying `label`, or -1.
  Eigen::Index find(const std::string& label) const;

  /// Smallest |a_i,k - a_j,k| over particles and branch pairs (inf for one branch).
  double min_separation() const;

 private:
  BranchState() = default;
  void normalize_log_weights();

  Eigen::VectorXd log_weights_;
  Eigen::MatrixXd anchors_;
  std::vector<std::string> labels_;
};

/// (label, weight) pairs in branch order.
std::vector<std::pair<std::string, double>> branch_weights(const BranchState& state);

/// log(sum exp(v)) without overflow; -inf for an all -inf input.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace grw
