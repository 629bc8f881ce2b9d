#include "corl/mdp.hpp"

#include <cmath>

#include "corl/errors.hpp"

namespace corl {

namespace {

Eigen::VectorXd make_coef(std::initializer_list<double> values) {
  Eigen::VectorXd v(kCoefCount);
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

void PopulationSpec::validate() const {
  if (groups < 1) throw ConfigError("PopulationSpec: groups must be >= 1");
  if (group_size < 1) throw ConfigError("PopulationSpec: group_size must be >= 1");
  if (static_cast<int>(group_templates.size()) != groups)
    throw ConfigError("PopulationSpec: need one coefficient template per group");
  for (const auto& tpl : group_templates) {
    if (tpl.size() != kCoefCount)
      throw ConfigError("PopulationSpec: coefficient templates must have 14 entries");
    if (!tpl.allFinite())
      throw ConfigError("PopulationSpec: coefficient templates must be finite");
  }
  if (coef_noise_sd < 0.0) throw ConfigError("PopulationSpec: coef_noise_sd must be >= 0");
  if (state_noise_sd <= 0.0) throw ConfigError("PopulationSpec: state_noise_sd must be > 0");
  if (reward_noise_sd <= 0.0) throw ConfigError("PopulationSpec: reward_noise_sd must be > 0");
  if (state_dim < 3) throw ConfigError("PopulationSpec: state_dim must be >= 3");
  if (init_state_cov.rows() != state_dim || init_state_cov.cols() != state_dim)
    throw ConfigError("PopulationSpec: init_state_cov must be p x p");
  const double asym = (init_state_cov - init_state_cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw ConfigError("PopulationSpec: init_state_cov must be symmetric");
}

PopulationSpec PopulationSpec::defaults() {
  PopulationSpec spec;
  spec.group_templates = {
      make_coef({0.40, 0.25, 0.35, 0.65, 0.10, 0.50, 0.22,
                 2.00, 0.15, 0.20, 0.32, 0.10, 0.45, 800}),
      make_coef({0.35, 0.30, 0.30, 0.60, 0.05, 0.65, 0.28,
                 2.60, 0.35, 0.45, 0.45, 0.15, 0.50, 650}),
      make_coef({0.20, 0.50, 0.20, 0.62, 0.06, 0.52, 0.27,
                 3.00, 0.15, 0.15, 0.50, 0.16, 0.70, 450}),
  };
  spec.init_state_cov = Eigen::MatrixXd::Identity(spec.state_dim, spec.state_dim);
  return spec;
}

std::vector<UserModel> generate_population(const PopulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<UserModel> users;
  users.reserve(static_cast<std::size_t>(spec.num_users()));
  for (int v = 0; v < spec.groups; ++v) {
    for (int k = 0; k < spec.group_size; ++k) {
      const int id = v * spec.group_size + k;
      RngStream perturb(seed, static_cast<std::uint64_t>(id), Stream::CoefPerturb);
      UserModel user;
      user.coef = spec.group_templates[static_cast<std::size_t>(v)];
      for (int i = 0; i < kCoefCount; ++i) user.coef(i) += spec.coef_noise_sd * perturb.gauss();
      user.state_noise_sd = spec.state_noise_sd;
      user.reward_noise_sd = spec.reward_noise_sd;
      user.user_id = id;
      user.group = v;
      users.push_back(std::move(user));
    }
  }
  return users;
}

State initial_state(const Eigen::MatrixXd& cov, RngStream& stream) {
  if (cov.rows() != cov.cols()) throw ConfigError("initial_state: covariance must be square");
  const auto p = cov.rows();
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z(i) = stream.gauss();
  if (cov.isZero(0.0)) return State::Zero(p);
  // Eigendecomposition square root handles singular PSD covariances.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw NumericalError("initial_state: eigendecomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff()))
    throw ConfigError("initial_state: covariance is not positive semi-definite");
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose() * z;
}

std::pair<State, double> step(const UserModel& user, const State& s, int a,
                              RngStream& state_noise, RngStream& reward_noise) {
  if (a != 0 && a != 1) throw DomainError("step: action must be 0 or 1");
  const auto p = s.size();
  if (p < 3) throw DomainError("step: state must have at least 3 components");
  const Eigen::VectorXd& b = user.coef;
  const double sd = user.state_noise_sd;
  const double ad = static_cast<double>(a);

  State next(p);
  next(0) = b(0) * s(0) + sd * state_noise.gauss();
  next(1) = b(1) * s(1) + b(2) * ad + sd * state_noise.gauss();
  next(2) = b(3) * s(2) + b(4) * s(2) * ad + b(5) * ad + sd * state_noise.gauss();
  for (Eigen::Index j = 3; j < p; ++j) next(j) = b(6) * s(j) + sd * state_noise.gauss();

  const double noise = user.reward_noise_sd * reward_noise.gauss();
  const double reward =
      b(13) * (b(7) + ad * (b(8) + b(9) * next(0) + b(10) * next(1)) +
               b(11) * next(0) - b(12) * next(2) + noise);
  return {std::move(next), reward};
}

Trajectory draw_warm_start(const UserModel& user, const Eigen::MatrixXd& init_state_cov,
                           int t0, UserStreams& streams) {
  if (t0 < 1) throw ConfigError("draw_warm_start: t0 must be >= 1");
  Trajectory traj;
  traj.user_id = user.user_id;
  traj.tuples.reserve(static_cast<std::size_t>(t0));
  State s = initial_state(init_state_cov, streams.init);
  for (int t = 0; t < t0; ++t) {
    const int a = streams.action.bernoulli(0.5);
    auto [s_next, r] = step(user, s, a, streams.state, streams.reward);
    traj.tuples.push_back(Tuple{s, a, r, s_next});
    s = s_next;
  }
  return traj;
}

}  // namespace corl
