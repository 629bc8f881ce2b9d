#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "corl/graph.hpp"
#include "corl/mdp.hpp"

namespace corl {

enum class Method { Separate, Cohesion1, Cohesion2 };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct ExperimentConfig {
  Method method = Method::Cohesion2;
  int horizon = 80;        // T, total tuples per user
  int warm_start = 10;     // T0, coin-flip phase and graph-learning window
  double gamma = 0.8;
  // Cohesion weights: mu1 drives the critic coupling, mu2 the second-stage
  // coupling, mu3 the actor coupling.
  double mu1 = 0.1;
  double mu2 = 0.001;
  double mu3 = 0.1;
  // Ridge weights for the cohesion methods (see resolve_regularization).
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double zeta3 = 0.0;
  // Ridge weights for the separate baseline's actor/critic.
  double zeta_a = 0.1;
  double zeta_c = 0.1;
  int knn = 8;             // K for the similarity graph
  PopulationSpec population = PopulationSpec::defaults();
  std::uint64_t seed = 1;
  int actor_max_iterations = 200;
  double actor_gradient_tol = 1e-6;

  void validate() const;
};

// Defaults with mu2 = 0.01*mu1, mu3 = mu1 and the ridge rule applied:
// zeta1..3 = 0.1 when the smallest cohesion weight is at or below 1e-4,
// otherwise 0.
ExperimentConfig make_config(Method method, double gamma, double mu1, std::uint64_t seed);

struct RunResult {
  Eigen::MatrixXd theta;                 // m x N, final policy parameters
  Eigen::MatrixXd w;                     // u x N, final value parameters
  CohesionGraph graph;                   // empty for the separate baseline
  std::vector<Trajectory> trajectories;  // length T each
  int critic_updates = 0;
  int actor_updates = 0;
  double wall_time_s = 0.0;
};

// The full online protocol: warm start for all users, one-time graph
// construction, then one joint critic solve and one actor ascent per step.
// Deterministic given the config.
RunResult run_online(const ExperimentConfig& config);

}  // namespace corl
