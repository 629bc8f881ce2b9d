#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corl/mdp.hpp"

namespace corl {

// Per-user observation matrices for the value estimation. Column i of X is
// the value feature of tuple i; column i of Y is the policy-averaged feature
// of the next state, which depends on the user's current policy parameters.
struct UserDesign {
  Eigen::MatrixXd X;   // u x t
  Eigen::MatrixXd Y;   // u x t
  Eigen::VectorXd r;   // t
};

// Build a design from one trajectory under the given policy parameters.
UserDesign build_design(const Trajectory& traj, const Eigen::VectorXd& theta);

// Per-user blocks of the joint block-diagonal operators. The full coupled
// operators are never materialized densely; solves assemble a sparse system
// from these blocks plus the Laplacian coupling.
struct BlockOperators {
  std::vector<Eigen::MatrixXd> gram;    // X_n X_n'  (u x u)
  std::vector<Eigen::MatrixXd> cross;   // X_n Y_n'  (u x u)
  std::vector<Eigen::MatrixXd> x;       // X_n       (u x t)
  int feature_dim = 0;                  // u
  int horizon = 0;                      // t
  int users = 0;                        // N
};

BlockOperators assemble_block_operators(const std::vector<UserDesign>& designs);

// Ridge-regularized per-user temporal-difference Q solve:
//   w = [X (X - gamma Y)' + zeta I]^{-1} X r.
Eigen::VectorXd lstdq_separate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const Eigen::VectorXd& r, double gamma, double zeta);

// Cohesion update, two-stage rule. With
//   P = F1 + (mu1 L + zeta1 I) (x) I_u - gamma F3
// the solution is vec(W) = [P'P + (mu2 L + zeta2 I) (x) I_u]^{-1} P' F2 vec(R),
// computed through a sparse SPD factorization.
Eigen::MatrixXd critic_update_cohesion1(const BlockOperators& ops,
                                        const Eigen::MatrixXd& laplacian,
                                        const Eigen::MatrixXd& rewards, double gamma,
                                        double mu1, double zeta1, double mu2, double zeta2);

// Cohesion update, single-solve rule:
//   vec(W) = [F1 - gamma F3 + (mu1 L + zeta1 I) (x) I_u]^{-1} F2 vec(R).
// The system is not symmetric in general, so a sparse LU is used.
Eigen::MatrixXd critic_update_cohesion2(const BlockOperators& ops,
                                        const Eigen::MatrixXd& laplacian,
                                        const Eigen::MatrixXd& rewards, double gamma,
                                        double mu1, double zeta1);

// Diagnostic for the two-stage system matrix B = P'P + (mu2 L + zeta2 I)(x)I_u.
struct SpdCheck {
  bool is_spd = false;         // symmetric within 1e-10 and Cholesky succeeded
  double min_eigenvalue = 0.0;
  double symmetry_defect = 0.0;
};

SpdCheck check_spd(const Eigen::MatrixXd& P, const Eigen::MatrixXd& laplacian,
                   double mu2, double zeta2);

}  // namespace corl
