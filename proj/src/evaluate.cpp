#include "corl/evaluate.hpp"

#include <numeric>

#include "corl/errors.hpp"
#include "corl/features.hpp"

namespace corl {

void EvalConfig::validate() const {
  if (burn_in < 0) throw ConfigError("EvalConfig: burn_in must be >= 0");
  if (rollout_length <= burn_in)
    throw ConfigError("EvalConfig: rollout_length must exceed burn_in");
}

std::vector<double> rollout_rewards(const UserModel& user, const Eigen::VectorXd& theta,
                                    const Eigen::MatrixXd& init_state_cov,
                                    const EvalConfig& config) {
  config.validate();
  const auto uid = static_cast<std::uint64_t>(user.user_id);
  RngStream init(config.seed, uid, Stream::EvalInitState);
  RngStream state_noise(config.seed, uid, Stream::EvalStateNoise);
  RngStream reward_noise(config.seed, uid, Stream::EvalRewardNoise);
  RngStream action_draw(config.seed, uid, Stream::EvalActionDraw);

  std::vector<double> rewards;
  rewards.reserve(static_cast<std::size_t>(config.rollout_length));
  State s = initial_state(init_state_cov, init);
  for (int t = 0; t < config.rollout_length; ++t) {
    const int a = sample_action(theta, s, action_draw);
    auto [s_next, r] = step(user, s, a, state_noise, reward_noise);
    rewards.push_back(r);
    s = std::move(s_next);
  }
  return rewards;
}

double mean_after_burnin(const std::vector<double>& rewards, int burn_in) {
  if (burn_in < 0 || static_cast<std::size_t>(burn_in) >= rewards.size())
    throw ConfigError("mean_after_burnin: burn_in must leave a nonempty tail");
  const auto first = rewards.begin() + burn_in;
  const double sum = std::accumulate(first, rewards.end(), 0.0);
  return sum / static_cast<double>(rewards.end() - first);
}

double long_run_avg_reward(const UserModel& user, const Eigen::VectorXd& theta,
                           const Eigen::MatrixXd& init_state_cov, const EvalConfig& config) {
  return mean_after_burnin(rollout_rewards(user, theta, init_state_cov, config),
                           config.burn_in);
}

ElrarResult elrar(const std::vector<UserModel>& users, const Eigen::MatrixXd& theta,
                  const Eigen::MatrixXd& init_state_cov, const EvalConfig& config,
                  bool parallel) {
  const int n = static_cast<int>(users.size());
  if (theta.cols() != n) throw ConfigError("elrar: theta must have one column per user");
  config.validate();

  ElrarResult result;
  result.per_user.resize(n);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i)
      result.per_user(i) = long_run_avg_reward(users[static_cast<std::size_t>(i)],
                                               theta.col(i), init_state_cov, config);
  } else {
    for (int i = 0; i < n; ++i)
      result.per_user(i) = long_run_avg_reward(users[static_cast<std::size_t>(i)],
                                               theta.col(i), init_state_cov, config);
  }
  // Fixed-order reduction so the parallel path reproduces the serial one.
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += result.per_user(i);
  result.mean = sum / static_cast<double>(n);
  return result;
}

}  // namespace corl
