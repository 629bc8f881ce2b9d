#include <doctest.h>

#include <cmath>
#include <random>

#include "corl/actor.hpp"
#include "corl/errors.hpp"
#include "corl/features.hpp"
#include "oracles.hpp"

using namespace corl;

namespace {

// Straight-loop re-implementation of the objective, kept deliberately naive:
// explicit softmax, explicit ordered-pair penalty sum.
double naive_objective(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                       const std::vector<Trajectory>& trajectories,
                       const Eigen::MatrixXd& adjacency, double mu3, double zeta3) {
  double total = 0.0;
  for (std::size_t n = 0; n < trajectories.size(); ++n) {
    double user_sum = 0.0;
    for (const Tuple& tup : trajectories[n].tuples) {
      const double e0 = -theta.col(static_cast<Eigen::Index>(n)).dot(policy_feature(tup.s, 0));
      const double e1 = -theta.col(static_cast<Eigen::Index>(n)).dot(policy_feature(tup.s, 1));
      const double z = std::exp(e0) + std::exp(e1);
      const double p0 = std::exp(e0) / z;
      const double p1 = std::exp(e1) / z;
      const double q0 = value_feature(tup.s, 0).dot(w.col(static_cast<Eigen::Index>(n)));
      const double q1 = value_feature(tup.s, 1).dot(w.col(static_cast<Eigen::Index>(n)));
      user_sum += q0 * p0 + q1 * p1;
    }
    total += user_sum / static_cast<double>(trajectories[n].tuples.size());
  }
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
      penalty += adjacency(i, j) * (theta.col(i) - theta.col(j)).squaredNorm();
  total -= 0.5 * mu3 * penalty;
  total -= 0.5 * zeta3 * theta.squaredNorm();
  return total;
}

Eigen::MatrixXd adjacency_of(const Eigen::MatrixXd& laplacian) {
  Eigen::MatrixXd adjacency = -laplacian;
  adjacency.diagonal().setZero();
  return adjacency;
}

}  // namespace

TEST_CASE("objective: single user with zero parameters averages both actions") {
  std::mt19937_64 rng(31);
  oracle::Instance inst = oracle::random_instance(1, 3, 6, rng);
  const Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(4, 1);
  const Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(1, 1);
  const double got = actor_objective(theta, inst.w, inst.trajectories, lap, 0.0, 0.0);
  double want = 0.0;
  for (const Tuple& tup : inst.trajectories[0].tuples)
    want += 0.5 * (value_feature(tup.s, 0).dot(inst.w.col(0)) +
                   value_feature(tup.s, 1).dot(inst.w.col(0)));
  want /= static_cast<double>(inst.trajectories[0].tuples.size());
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("objective: identical columns make the cohesion term vanish") {
  std::mt19937_64 rng(32);
  oracle::Instance inst = oracle::random_instance(4, 2, 5, rng);
  Eigen::MatrixXd theta(3, 4);
  Eigen::VectorXd column = Eigen::VectorXd::Constant(3, 0.37);
  for (int i = 0; i < 4; ++i) theta.col(i) = column;
  const double without = actor_objective(theta, inst.w, inst.trajectories, inst.laplacian,
                                         0.0, 0.0);
  const double with_cohesion = actor_objective(theta, inst.w, inst.trajectories,
                                               inst.laplacian, 1e6, 0.0);
  CHECK(with_cohesion == doctest::Approx(without).epsilon(1e-12));
}

TEST_CASE("objective: matches the naive re-implementation") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const int users = 2 + static_cast<int>(rng() % 4);
    oracle::Instance inst = oracle::random_instance(users, 2, 6, rng);
    const double got = actor_objective(inst.theta, inst.w, inst.trajectories, inst.laplacian,
                                       0.3, 0.2);
    const double want = naive_objective(inst.theta, inst.w, inst.trajectories,
                                        adjacency_of(inst.laplacian), 0.3, 0.2);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("gradient: matches central finite differences") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const int users = 2 + static_cast<int>(rng() % 4);
    const int state_dim = 2 + static_cast<int>(rng() % 2);
    oracle::Instance inst = oracle::random_instance(users, state_dim,
                                                    4 + static_cast<int>(rng() % 5), rng);
    const double mu3 = 0.1 * static_cast<double>(rng() % 5);
    const double zeta3 = 0.05 * static_cast<double>(rng() % 4);
    const Eigen::MatrixXd analytic =
        actor_gradient(inst.theta, inst.w, inst.trajectories, inst.laplacian, mu3, zeta3);
    const Eigen::MatrixXd fd = oracle::finite_difference(
        [&](const Eigen::MatrixXd& th) {
          return actor_objective(th, inst.w, inst.trajectories, inst.laplacian, mu3, zeta3);
        },
        inst.theta, 1e-5);
    CHECK(oracle::relative_error(analytic, fd) < 1e-5);
  }
}

TEST_CASE("gradient: decouples across users when mu3 = 0") {
  std::mt19937_64 rng(35);
  oracle::Instance inst = oracle::random_instance(3, 2, 6, rng);
  const Eigen::MatrixXd joint =
      actor_gradient(inst.theta, inst.w, inst.trajectories, inst.laplacian, 0.0, 0.25);
  for (int n = 0; n < 3; ++n) {
    std::vector<Trajectory> solo{inst.trajectories[static_cast<std::size_t>(n)]};
    const Eigen::MatrixXd single =
        actor_gradient(inst.theta.col(n), inst.w.col(n), solo, Eigen::MatrixXd::Zero(1, 1),
                       0.0, 0.25);
    CHECK((joint.col(n) - single.col(0)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("update: ascent trace is monotone and the result converges") {
  std::mt19937_64 rng(36);
  oracle::Instance inst = oracle::random_instance(4, 2, 8, rng);
  ActorSettings settings;
  settings.mu3 = 0.1;
  settings.zeta3 = 0.1;
  settings.max_iterations = 400;
  const ActorResult result =
      actor_update(inst.theta, inst.w, inst.trajectories, inst.laplacian, settings);
  REQUIRE(result.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
    CHECK(result.objective_trace[i] >= result.objective_trace[i - 1] - 1e-12);
  CHECK(result.converged);

  // resubmitting the converged point returns it unchanged
  const ActorResult again =
      actor_update(result.theta, inst.w, inst.trajectories, inst.laplacian, settings);
  CHECK(again.iterations == 0);
  CHECK(again.theta == result.theta);

  // a converged point is stationary: gradient below tolerance
  const Eigen::MatrixXd grad = actor_gradient(result.theta, inst.w, inst.trajectories,
                                              inst.laplacian, settings.mu3, settings.zeta3);
  CHECK(grad.cwiseAbs().maxCoeff() < settings.gradient_tol);
}

TEST_CASE("update: objective never falls below the warm start") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    oracle::Instance inst = oracle::random_instance(3, 2, 6, rng);
    ActorSettings settings;
    settings.mu3 = 0.05;
    settings.zeta3 = 0.05;
    settings.max_iterations = 25;
    const double before = actor_objective(inst.theta, inst.w, inst.trajectories,
                                          inst.laplacian, settings.mu3, settings.zeta3);
    const ActorResult result =
        actor_update(inst.theta, inst.w, inst.trajectories, inst.laplacian, settings);
    const double after = actor_objective(result.theta, inst.w, inst.trajectories,
                                         inst.laplacian, settings.mu3, settings.zeta3);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("update: strong cohesion pulls the policies together") {
  std::mt19937_64 rng(38);
  oracle::Instance inst = oracle::random_instance(5, 2, 8, rng);
  // complete graph so consensus is reachable from any column
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Ones(5, 5);
  adjacency.diagonal().setZero();
  const Eigen::MatrixXd lap =
      Eigen::MatrixXd(adjacency.rowwise().sum().asDiagonal()) - adjacency;
  double previous = -1.0;
  for (double mu3 : {1.0, 1e2, 1e4, 1e6}) {
    ActorSettings settings;
    settings.mu3 = mu3;
    settings.zeta3 = 1e-6;
    settings.max_iterations = 600;
    const ActorResult result =
        actor_update(inst.theta, inst.w, inst.trajectories, lap, settings);
    double max_pair = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        max_pair = std::max(max_pair, (result.theta.col(i) - result.theta.col(j)).norm());
    if (previous >= 0.0) CHECK(max_pair <= previous + 1e-9);
    previous = max_pair;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("update: with zero values only the penalties remain and theta collapses") {
  std::mt19937_64 rng(39);
  oracle::Instance inst = oracle::random_instance(4, 2, 6, rng);
  ActorSettings settings;
  settings.mu3 = 0.1;
  settings.zeta3 = 0.1;
  settings.max_iterations = 2000;
  settings.gradient_tol = 1e-9;
  const Eigen::MatrixXd zero_w = Eigen::MatrixXd::Zero(inst.w.rows(), inst.w.cols());
  const ActorResult result =
      actor_update(inst.theta, zero_w, inst.trajectories, inst.laplacian, settings);
  CHECK(result.theta.norm() < 1e-6);
}

TEST_CASE("update: non-finite starting point is a hard error") {
  std::mt19937_64 rng(40);
  oracle::Instance inst = oracle::random_instance(2, 2, 4, rng);
  Eigen::MatrixXd bad = inst.theta;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  ActorSettings settings;
  CHECK_THROWS_AS(actor_update(bad, inst.w, inst.trajectories, inst.laplacian, settings),
                  NumericalError);
}
