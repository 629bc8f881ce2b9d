#include "corl/features.hpp"

#include <cmath>

#include "corl/errors.hpp"

namespace corl {

Eigen::VectorXd value_feature(const State& s, int a) {
  if (a != 0 && a != 1) throw DomainError("value_feature: action must be 0 or 1");
  const auto p = s.size();
  Eigen::VectorXd x(2 * p + 2);
  x(0) = 1.0;
  x.segment(1, p) = s;
  x(p + 1) = static_cast<double>(a);
  x.segment(p + 2, p) = static_cast<double>(a) * s;
  return x;
}

Eigen::VectorXd policy_feature(const State& s, int a) {
  if (a != 0 && a != 1) throw DomainError("policy_feature: action must be 0 or 1");
  const auto p = s.size();
  Eigen::VectorXd phi(p + 1);
  phi.head(p) = static_cast<double>(a) * s;
  phi(p) = static_cast<double>(a);
  return phi;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& exponents) {
  const double shift = exponents.maxCoeff();
  Eigen::VectorXd probs = (exponents.array() - shift).exp();
  probs /= probs.sum();
  return probs.cwiseMax(1e-300);
}

Eigen::VectorXd policy_prob(const Eigen::VectorXd& theta, const State& s) {
  Eigen::VectorXd exponents(kNumActions);
  for (int a = 0; a < kNumActions; ++a) exponents(a) = -theta.dot(policy_feature(s, a));
  return softmax(exponents);
}

Eigen::MatrixXd policy_prob_grad(const Eigen::VectorXd& theta, const State& s) {
  const Eigen::VectorXd probs = policy_prob(theta, s);
  const auto m = theta.size();
  Eigen::MatrixXd phi(m, kNumActions);
  for (int a = 0; a < kNumActions; ++a) phi.col(a) = policy_feature(s, a);
  const Eigen::VectorXd phi_mean = phi * probs;
  Eigen::MatrixXd grad(m, kNumActions);
  for (int a = 0; a < kNumActions; ++a) grad.col(a) = probs(a) * (phi_mean - phi.col(a));
  return grad;
}

int sample_action(const Eigen::VectorXd& theta, const State& s, RngStream& stream) {
  const Eigen::VectorXd probs = policy_prob(theta, s);
  const double draw = stream.uniform();
  double acc = 0.0;
  for (int a = 0; a + 1 < kNumActions; ++a) {
    acc += probs(a);
    if (draw < acc) return a;
  }
  return kNumActions - 1;
}

Eigen::VectorXd next_value_feature(const Eigen::VectorXd& theta, const State& s_next) {
  const Eigen::VectorXd probs = policy_prob(theta, s_next);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * s_next.size() + 2);
  for (int a = 0; a < kNumActions; ++a) y += probs(a) * value_feature(s_next, a);
  return y;
}

}  // namespace corl
