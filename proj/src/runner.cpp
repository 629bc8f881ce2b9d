#include "corl/runner.hpp"

#include <chrono>

#include "corl/actor.hpp"
#include "corl/critic.hpp"
#include "corl/errors.hpp"
#include "corl/features.hpp"

namespace corl {

std::string method_name(Method method) {
  switch (method) {
    case Method::Separate: return "separate";
    case Method::Cohesion1: return "cohesion1";
    case Method::Cohesion2: return "cohesion2";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "separate") return Method::Separate;
  if (name == "cohesion1") return Method::Cohesion1;
  if (name == "cohesion2") return Method::Cohesion2;
  throw ConfigError("unknown method: " + name);
}

void ExperimentConfig::validate() const {
  population.validate();
  if (warm_start < 1) throw ConfigError("config: warm_start must be >= 1");
  if (horizon <= warm_start) throw ConfigError("config: horizon must exceed warm_start");
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("config: gamma must lie in [0, 1)");
  if (mu1 < 0 || mu2 < 0 || mu3 < 0 || zeta1 < 0 || zeta2 < 0 || zeta3 < 0 ||
      zeta_a < 0 || zeta_c < 0)
    throw ConfigError("config: regularization weights must be nonnegative");
  if (method != Method::Separate) {
    if (mu1 <= 0.0 && zeta1 <= 0.0)
      throw ConfigError("config: cohesion methods need mu1 > 0 or zeta1 > 0");
    if (knn < 1) throw ConfigError("config: knn must be >= 1");
    if (population.num_users() < knn + 1)
      throw ConfigError("config: population too small for the requested knn");
  }
  if (actor_max_iterations < 1) throw ConfigError("config: actor_max_iterations must be >= 1");
}

ExperimentConfig make_config(Method method, double gamma, double mu1, std::uint64_t seed) {
  ExperimentConfig config;
  config.method = method;
  config.gamma = gamma;
  config.mu1 = mu1;
  config.mu2 = 0.01 * mu1;
  config.mu3 = mu1;
  const double zeta = std::min({config.mu1, config.mu2, config.mu3}) <= 1e-4 ? 0.1 : 0.0;
  config.zeta1 = zeta;
  config.zeta2 = zeta;
  config.zeta3 = zeta;
  config.seed = seed;
  return config;
}

RunResult run_online(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  const std::vector<UserModel> users = generate_population(config.population, config.seed);
  const int n = static_cast<int>(users.size());
  const int p = config.population.state_dim;
  const int m = policy_dim(p);

  std::vector<UserStreams> streams;
  streams.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) streams.emplace_back(config.seed, i);

  RunResult result;
  result.trajectories.resize(static_cast<std::size_t>(n));
  std::vector<State> current(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    result.trajectories[static_cast<std::size_t>(i)].user_id = users[static_cast<std::size_t>(i)].user_id;
    result.trajectories[static_cast<std::size_t>(i)].tuples.reserve(static_cast<std::size_t>(config.horizon));
    current[static_cast<std::size_t>(i)] =
        initial_state(config.population.init_state_cov, streams[static_cast<std::size_t>(i)].init);
  }

  result.theta = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);

  ActorSettings actor_settings;
  actor_settings.max_iterations = config.actor_max_iterations;
  actor_settings.gradient_tol = config.actor_gradient_tol;
  if (config.method == Method::Separate) {
    actor_settings.mu3 = 0.0;
    actor_settings.zeta3 = config.zeta_a;
  } else {
    actor_settings.mu3 = config.mu3;
    actor_settings.zeta3 = config.zeta3;
  }

  for (int t = 1; t <= config.horizon; ++t) {
    // Act and observe. Warm-start actions are coin flips; afterwards each
    // user samples from their current policy.
    for (int i = 0; i < n; ++i) {
      UserStreams& st = streams[static_cast<std::size_t>(i)];
      const State& s = current[static_cast<std::size_t>(i)];
      const int a = t <= config.warm_start
                        ? st.action.bernoulli(0.5)
                        : sample_action(result.theta.col(i), s, st.action);
      auto [s_next, r] = step(users[static_cast<std::size_t>(i)], s, a, st.state, st.reward);
      result.trajectories[static_cast<std::size_t>(i)].tuples.push_back(Tuple{s, a, r, s_next});
      current[static_cast<std::size_t>(i)] = std::move(s_next);
    }

    if (t == config.warm_start && config.method != Method::Separate) {
      std::vector<Eigen::VectorXd> features;
      features.reserve(static_cast<std::size_t>(n));
      for (const Trajectory& traj : result.trajectories)
        features.push_back(wst_feature(traj, config.warm_start));
      result.graph = build_graph(features, config.knn);
      laplacian = result.graph.laplacian;
    }

    if (t <= config.warm_start) continue;

    // Rebuild designs from the full trajectories under the current policies;
    // Y depends on Theta so it cannot be cached across steps.
    std::vector<UserDesign> designs(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
      designs[static_cast<std::size_t>(i)] =
          build_design(result.trajectories[static_cast<std::size_t>(i)], result.theta.col(i));

    try {
      if (config.method == Method::Separate) {
        if (result.w.size() == 0) result.w.resize(designs.front().X.rows(), n);
        for (int i = 0; i < n; ++i) {
          const UserDesign& d = designs[static_cast<std::size_t>(i)];
          result.w.col(i) = lstdq_separate(d.X, d.Y, d.r, config.gamma, config.zeta_c);
        }
      } else {
        const BlockOperators ops = assemble_block_operators(designs);
        Eigen::MatrixXd rewards(ops.horizon, n);
        for (int i = 0; i < n; ++i) rewards.col(i) = designs[static_cast<std::size_t>(i)].r;
        result.w = config.method == Method::Cohesion1
                       ? critic_update_cohesion1(ops, laplacian, rewards, config.gamma,
                                                 config.mu1, config.zeta1, config.mu2,
                                                 config.zeta2)
                       : critic_update_cohesion2(ops, laplacian, rewards, config.gamma,
                                                 config.mu1, config.zeta1);
      }
      ++result.critic_updates;

      ActorResult actor = actor_update(result.theta, result.w, result.trajectories,
                                       laplacian, actor_settings);
      result.theta = std::move(actor.theta);
      ++result.actor_updates;
    } catch (const NumericalError& err) {
      throw NumericalError("run_online: update failed at step " + std::to_string(t) +
                           ": " + err.what());
    }
  }

  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace corl
