#include <doctest.h>

#include <cmath>
#include <random>

#include "corl/errors.hpp"
#include "corl/runner.hpp"

using namespace corl;

namespace {

ExperimentConfig desk_config(Method method, std::uint64_t seed) {
  ExperimentConfig config = make_config(method, 0.6, 0.1, seed);
  config.horizon = 18;
  config.warm_start = 8;
  config.knn = 3;
  config.population.group_size = 3;  // nine users total
  return config;
}

}  // namespace

TEST_CASE("separate with one user runs and never builds a graph") {
  ExperimentConfig config = make_config(Method::Separate, 0.4, 0.1, 5);
  config.population.groups = 1;
  config.population.group_size = 1;
  config.population.group_templates.resize(1);
  config.horizon = 15;
  config.warm_start = 6;
  const RunResult result = run_online(config);
  CHECK(result.graph.empty());
  CHECK(result.trajectories.size() == 1);
  CHECK(result.trajectories[0].tuples.size() == 15);
  CHECK(result.theta.cols() == 1);
  CHECK(result.w.cols() == 1);
}

TEST_CASE("cohesion2 with zero cohesion weights reduces to separate") {
  ExperimentConfig cohesion = desk_config(Method::Cohesion2, 33);
  cohesion.mu1 = 0.0;
  cohesion.mu2 = 0.0;
  cohesion.mu3 = 0.0;
  cohesion.zeta1 = 0.1;
  cohesion.zeta2 = 0.1;
  cohesion.zeta3 = 0.1;
  ExperimentConfig separate = desk_config(Method::Separate, 33);
  separate.zeta_a = 0.1;
  separate.zeta_c = 0.1;

  const RunResult a = run_online(cohesion);
  const RunResult b = run_online(separate);
  REQUIRE(a.trajectories.size() == b.trajectories.size());
  for (std::size_t n = 0; n < a.trajectories.size(); ++n) {
    REQUIRE(a.trajectories[n].tuples.size() == b.trajectories[n].tuples.size());
    for (std::size_t t = 0; t < a.trajectories[n].tuples.size(); ++t)
      CHECK(a.trajectories[n].tuples[t].a == b.trajectories[n].tuples[t].a);
  }
  const double denom = std::max(1.0, b.theta.norm());
  CHECK((a.theta - b.theta).norm() / denom < 1e-8);
}

TEST_CASE("horizon one past the warm start performs exactly one update") {
  ExperimentConfig config = desk_config(Method::Cohesion2, 4);
  config.horizon = config.warm_start + 1;
  const RunResult result = run_online(config);
  CHECK(result.critic_updates == 1);
  CHECK(result.actor_updates == 1);
}

TEST_CASE("runs are bit-identical under the same config") {
  for (Method method : {Method::Separate, Method::Cohesion1, Method::Cohesion2}) {
    const ExperimentConfig config = desk_config(method, 88);
    const RunResult a = run_online(config);
    const RunResult b = run_online(config);
    CHECK(a.theta == b.theta);
    CHECK(a.w == b.w);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t n = 0; n < a.trajectories.size(); ++n)
      for (std::size_t t = 0; t < a.trajectories[n].tuples.size(); ++t) {
        CHECK(a.trajectories[n].tuples[t].a == b.trajectories[n].tuples[t].a);
        CHECK(a.trajectories[n].tuples[t].r == b.trajectories[n].tuples[t].r);
        CHECK(a.trajectories[n].tuples[t].s == b.trajectories[n].tuples[t].s);
      }
    if (method != Method::Separate) {
      CHECK(a.graph.adjacency == b.graph.adjacency);
      CHECK(a.graph.size() == 9);
    }
  }
}

TEST_CASE("trajectories chain: each next state is the following state") {
  const RunResult result = run_online(desk_config(Method::Cohesion1, 12));
  for (const Trajectory& traj : result.trajectories) {
    REQUIRE(traj.tuples.size() == 18);
    for (std::size_t t = 0; t + 1 < traj.tuples.size(); ++t)
      CHECK(traj.tuples[t].s_next == traj.tuples[t + 1].s);
  }
}

TEST_CASE("warm-start actions are independent of states (permutation test)") {
  ExperimentConfig config = desk_config(Method::Separate, 2027);
  config.horizon = 40;
  config.warm_start = 30;
  const RunResult result = run_online(config);

  std::vector<double> actions;
  std::vector<Eigen::VectorXd> states;
  for (const Trajectory& traj : result.trajectories)
    for (int t = 0; t < config.warm_start; ++t) {
      actions.push_back(traj.tuples[static_cast<std::size_t>(t)].a);
      states.push_back(traj.tuples[static_cast<std::size_t>(t)].s);
    }
  const int count = static_cast<int>(actions.size());
  const int p = static_cast<int>(states.front().size());

  auto statistic = [&](const std::vector<double>& acts) {
    double total = 0.0;
    for (int d = 0; d < p; ++d) {
      double ma = 0.0, ms = 0.0;
      for (int i = 0; i < count; ++i) {
        ma += acts[static_cast<std::size_t>(i)];
        ms += states[static_cast<std::size_t>(i)](d);
      }
      ma /= count;
      ms /= count;
      double cov = 0.0, va = 0.0, vs = 0.0;
      for (int i = 0; i < count; ++i) {
        const double da = acts[static_cast<std::size_t>(i)] - ma;
        const double ds = states[static_cast<std::size_t>(i)](d) - ms;
        cov += da * ds;
        va += da * da;
        vs += ds * ds;
      }
      total += std::abs(cov / std::sqrt(std::max(va * vs, 1e-300)));
    }
    return total;
  };

  const double observed = statistic(actions);
  std::mt19937_64 rng(555);
  std::vector<double> permuted = actions;
  int at_least = 0;
  const int permutations = 500;
  for (int rep = 0; rep < permutations; ++rep) {
    std::shuffle(permuted.begin(), permuted.end(), rng);
    if (statistic(permuted) >= observed) ++at_least;
  }
  const double p_value = (1.0 + at_least) / (1.0 + permutations);
  CHECK(p_value > 0.01);
}

TEST_CASE("invalid configurations are rejected") {
  ExperimentConfig config = desk_config(Method::Cohesion2, 1);
  config.horizon = config.warm_start;
  CHECK_THROWS_AS(run_online(config), ConfigError);

  config = desk_config(Method::Cohesion2, 1);
  config.gamma = 1.0;
  CHECK_THROWS_AS(run_online(config), ConfigError);

  config = desk_config(Method::Cohesion2, 1);
  config.mu1 = 0.0;
  config.zeta1 = 0.0;
  CHECK_THROWS_AS(run_online(config), ConfigError);

  config = desk_config(Method::Cohesion2, 1);
  config.knn = 9;  // needs at least knn + 1 users
  CHECK_THROWS_AS(run_online(config), ConfigError);
}

TEST_CASE("method names round trip") {
  for (Method method : {Method::Separate, Method::Cohesion1, Method::Cohesion2})
    CHECK(method_from_name(method_name(method)) == method);
  CHECK_THROWS_AS(method_from_name("bogus"), ConfigError);
}
