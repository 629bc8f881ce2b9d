#pragma once

#include <Eigen/Dense>

#include "corl/mdp.hpp"
#include "corl/rng.hpp"

namespace corl {

inline int value_dim(int p) { return 2 * p + 2; }   // u
inline int policy_dim(int p) { return p + 1; }      // m

// Value feature x(s,a) = [1, s, a, a*s].
Eigen::VectorXd value_feature(const State& s, int a);

// Policy feature phi(s,a) = [a*s, a]; phi(s,0) = 0.
Eigen::VectorXd policy_feature(const State& s, int a);

// Stable softmax over per-action exponents (max-subtraction; probabilities
// clamped away from exact zero so downstream logs stay finite).
Eigen::VectorXd softmax(const Eigen::VectorXd& exponents);

// pi_theta(a|s) for both actions. The exponent is -theta'phi(s,a); a larger
// theta'phi makes the action LESS likely.
Eigen::VectorXd policy_prob(const Eigen::VectorXd& theta, const State& s);

// d pi(a|s) / d theta, one column per action (m x 2).
Eigen::MatrixXd policy_prob_grad(const Eigen::VectorXd& theta, const State& s);

int sample_action(const Eigen::VectorXd& theta, const State& s, RngStream& stream);

// Expected next-step value feature y(s'; theta) = sum_a x(s',a) pi(a|s').
Eigen::VectorXd next_value_feature(const Eigen::VectorXd& theta, const State& s_next);

}  // namespace corl
