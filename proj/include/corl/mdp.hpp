#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "corl/rng.hpp"

namespace corl {

using State = Eigen::VectorXd;

inline constexpr int kCoefCount = 14;
inline constexpr int kNumActions = 2;

// One simulated individual. The transition/reward dynamics are fully
// determined by the 14 coefficients plus the two noise scales.
//
// coef layout:
//   [0]  AR weight, state component 1
//   [1]  AR weight, state component 2
//   [2]  action effect on component 2
//   [3]  AR weight, state component 3
//   [4]  state3 x action interaction
//   [5]  action effect on component 3
//   [6]  AR weight for components 4..p (unused at p = 3)
//   [7]  reward baseline
//   [8]  treatment main effect
//   [9]  treatment x state1
//   [10] treatment x state2
//   [11] state1 reward effect
//   [12] treatment-fatigue penalty on state3
//   [13] reward scale (converts the inner bracket into step counts)
struct UserModel {
  Eigen::VectorXd coef;        // 14 dynamics coefficients
  double state_noise_sd = 0.5;
  double reward_noise_sd = 1.0;
  int user_id = 0;
  int group = 0;
};

struct Tuple {
  State s;
  int a = 0;
  double r = 0.0;
  State s_next;
};

struct Trajectory {
  int user_id = 0;
  std::vector<Tuple> tuples;
};

// Population synthesis settings: V groups of N_v users each, every user's
// coefficients a Gaussian perturbation of their group template.
struct PopulationSpec {
  int groups = 3;                                 // V
  int group_size = 15;                            // N_v
  std::vector<Eigen::VectorXd> group_templates;   // V vectors of 14 coefficients
  double coef_noise_sd = 0.05;
  double state_noise_sd = 0.5;
  double reward_noise_sd = 1.0;
  int state_dim = 3;                              // p
  Eigen::MatrixXd init_state_cov;                 // p x p, PSD

  int num_users() const { return groups * group_size; }

  // Throws ConfigError when any invariant is violated.
  void validate() const;

  // The three reference groups used throughout the experiments.
  static PopulationSpec defaults();
};

// Draws one perturbed UserModel per (group, slot); pure function of (spec, seed).
std::vector<UserModel> generate_population(const PopulationSpec& spec, std::uint64_t seed);

// Sample from N_p(0, cov). cov must be PSD; a zero matrix yields the zero state.
State initial_state(const Eigen::MatrixXd& cov, RngStream& stream);

// One transition: next state from (s, a) plus reward evaluated at the
// post-transition state. Always consumes p state-noise draws and one
// reward-noise draw, so streams stay aligned across noise settings.
std::pair<State, double> step(const UserModel& user, const State& s, int a,
                              RngStream& state_noise, RngStream& reward_noise);

// Micro-randomized warm start: t0 tuples with coin-flip actions, consuming
// from the caller's streams (the online loop keeps drawing from the same ones).
Trajectory draw_warm_start(const UserModel& user, const Eigen::MatrixXd& init_state_cov,
                           int t0, UserStreams& streams);

}  // namespace corl
