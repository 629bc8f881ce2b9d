#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "corl/mdp.hpp"

namespace corl {

struct EvalConfig {
  int rollout_length = 5000;  // T_eval
  int burn_in = 1000;         // rewards up to and including this step are discarded
  std::uint64_t seed = 1;

  void validate() const;
};

// Simulate rollout_length steps under the policy from a fresh initial state
// and return every reward. Uses evaluation-only RNG streams keyed by the
// user id, so rollouts of distinct users are independent and order-free.
std::vector<double> rollout_rewards(const UserModel& user, const Eigen::VectorXd& theta,
                                    const Eigen::MatrixXd& init_state_cov,
                                    const EvalConfig& config);

// Mean of rewards[burn_in..end); the burned-in prefix never contributes.
double mean_after_burnin(const std::vector<double>& rewards, int burn_in);

// Long-run average reward of one user's policy.
double long_run_avg_reward(const UserModel& user, const Eigen::VectorXd& theta,
                           const Eigen::MatrixXd& init_state_cov, const EvalConfig& config);

struct ElrarResult {
  double mean = 0.0;
  Eigen::VectorXd per_user;
};

// Population-level expected long-run average reward: the mean of per-user
// long-run averages. The parallel path distributes users across threads and
// is bit-identical to the serial reference.
ElrarResult elrar(const std::vector<UserModel>& users, const Eigen::MatrixXd& theta,
                  const Eigen::MatrixXd& init_state_cov, const EvalConfig& config,
                  bool parallel = true);

}  // namespace corl
