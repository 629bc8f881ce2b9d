#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corl/mdp.hpp"

namespace corl {

struct ActorSettings {
  double mu3 = 0.1;            // cohesion weight across users
  double zeta3 = 0.0;          // ridge weight
  int max_iterations = 200;
  double gradient_tol = 1e-6;  // max-norm stopping rule
};

// Joint policy objective over all users: for each user the trajectory-averaged
// policy-weighted Q value under that user's critic column, minus the cohesion
// penalty mu3 * Tr(Theta L Theta') and the ridge penalty (zeta3/2) ||Theta||_F^2.
double actor_objective(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                       const std::vector<Trajectory>& trajectories,
                       const Eigen::MatrixXd& laplacian, double mu3, double zeta3);

// Exact gradient of actor_objective, one column per user.
Eigen::MatrixXd actor_gradient(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                               const std::vector<Trajectory>& trajectories,
                               const Eigen::MatrixXd& laplacian, double mu3, double zeta3);

struct ActorResult {
  Eigen::MatrixXd theta;
  std::vector<double> objective_trace;  // objective at the start and after each accepted step
  int iterations = 0;
  double grad_max_norm = 0.0;
  bool converged = false;
};

// Limited-memory quasi-Newton ascent with backtracking line search, warm
// started from the supplied Theta. Only improving steps are accepted, so the
// returned objective never falls below the starting value.
ActorResult actor_update(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                         const std::vector<Trajectory>& trajectories,
                         const Eigen::MatrixXd& laplacian, const ActorSettings& settings);

}  // namespace corl
