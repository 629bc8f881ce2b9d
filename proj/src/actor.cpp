#include "corl/actor.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "corl/errors.hpp"
#include "corl/features.hpp"

namespace corl {

namespace {

// Per-user tables that do not change while Theta is optimized: the Q values
// of both actions at every visited state, and the policy feature of the
// active action (phi(s,0) is identically zero).
struct UserTables {
  Eigen::VectorXd q0;   // t
  Eigen::VectorXd q1;   // t
  Eigen::MatrixXd phi1; // m x t
};

struct Workspace {
  std::vector<UserTables> users;
  Eigen::MatrixXd laplacian_sym;  // L + L'
  double mu3 = 0.0;
  double zeta3 = 0.0;
  int policy_dim = 0;
};

Workspace make_workspace(const Eigen::MatrixXd& w,
                         const std::vector<Trajectory>& trajectories,
                         const Eigen::MatrixXd& laplacian, double mu3, double zeta3) {
  const int n = static_cast<int>(trajectories.size());
  if (w.cols() != n) throw ConfigError("actor: W must have one column per user");
  if (laplacian.rows() != n || laplacian.cols() != n)
    throw ConfigError("actor: Laplacian must be N x N");
  Workspace ws;
  ws.users.resize(static_cast<std::size_t>(n));
  ws.laplacian_sym = laplacian + laplacian.transpose();
  ws.mu3 = mu3;
  ws.zeta3 = zeta3;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const auto& tuples = trajectories[static_cast<std::size_t>(i)].tuples;
    const auto t = static_cast<Eigen::Index>(tuples.size());
    UserTables& tab = ws.users[static_cast<std::size_t>(i)];
    const auto m = tuples.empty() ? 0 : tuples.front().s.size() + 1;
    tab.q0.resize(t);
    tab.q1.resize(t);
    tab.phi1.resize(m, t);
    for (Eigen::Index j = 0; j < t; ++j) {
      const State& s = tuples[static_cast<std::size_t>(j)].s;
      tab.q0(j) = value_feature(s, 0).dot(w.col(i));
      tab.q1(j) = value_feature(s, 1).dot(w.col(i));
      tab.phi1.col(j) = policy_feature(s, 1);
    }
  }
  for (const auto& traj : trajectories)
    if (traj.tuples.empty()) throw ConfigError("actor: every user needs a nonempty trajectory");
  ws.policy_dim = static_cast<int>(ws.users.front().phi1.rows());
  return ws;
}

// Probability of action 1 given exponent e1 = theta'phi(s,1); action 0 has
// exponent 0 and the policy exponents carry a negative sign.
inline double prob_action1(double e1) {
  const double shift = std::max(0.0, -e1);
  const double z0 = std::exp(-shift);
  const double z1 = std::exp(-e1 - shift);
  return z1 / (z0 + z1);
}

double objective_impl(const Workspace& ws, const Eigen::MatrixXd& theta) {
  double data = 0.0;
  const int n = static_cast<int>(ws.users.size());
  for (int i = 0; i < n; ++i) {
    const UserTables& tab = ws.users[static_cast<std::size_t>(i)];
    const Eigen::VectorXd e1 = tab.phi1.transpose() * theta.col(i);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < e1.size(); ++j) {
      const double p1 = prob_action1(e1(j));
      acc += tab.q0(j) * (1.0 - p1) + tab.q1(j) * p1;
    }
    data += acc / static_cast<double>(e1.size());
  }
  const double cohesion =
      0.5 * ws.mu3 * (theta * ws.laplacian_sym).cwiseProduct(theta).sum();
  const double ridge = 0.5 * ws.zeta3 * theta.squaredNorm();
  return data - cohesion - ridge;
}

Eigen::MatrixXd gradient_impl(const Workspace& ws, const Eigen::MatrixXd& theta) {
  const int n = static_cast<int>(ws.users.size());
  Eigen::MatrixXd grad(theta.rows(), theta.cols());
  for (int i = 0; i < n; ++i) {
    const UserTables& tab = ws.users[static_cast<std::size_t>(i)];
    const Eigen::VectorXd e1 = tab.phi1.transpose() * theta.col(i);
    // d/dtheta sum_a q_a pi_a = pi0 pi1 (q0 - q1) phi1 for the binary policy
    // with phi(s,0) = 0.
    Eigen::VectorXd coeff(e1.size());
    for (Eigen::Index j = 0; j < e1.size(); ++j) {
      const double p1 = prob_action1(e1(j));
      coeff(j) = (1.0 - p1) * p1 * (tab.q0(j) - tab.q1(j));
    }
    grad.col(i) = (tab.phi1 * coeff) / static_cast<double>(e1.size());
  }
  grad.noalias() -= ws.mu3 * theta * ws.laplacian_sym;
  grad -= ws.zeta3 * theta;
  return grad;
}

// Full second derivative of the objective with respect to vec(Theta),
// columns stacked. Data blocks are per user; the cohesion penalty couples
// users through identity blocks.
Eigen::MatrixXd hessian_impl(const Workspace& ws, const Eigen::MatrixXd& theta) {
  const int n = static_cast<int>(ws.users.size());
  const int m = static_cast<int>(theta.rows());
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n * m, n * m);
  for (int i = 0; i < n; ++i) {
    const UserTables& tab = ws.users[static_cast<std::size_t>(i)];
    const Eigen::VectorXd e1 = tab.phi1.transpose() * theta.col(i);
    Eigen::VectorXd coeff(e1.size());
    for (Eigen::Index j = 0; j < e1.size(); ++j) {
      const double p1 = prob_action1(e1(j));
      const double p0 = 1.0 - p1;
      coeff(j) = (tab.q1(j) - tab.q0(j)) * (p0 - p1) * p0 * p1;
    }
    hess.block(i * m, i * m, m, m) =
        (tab.phi1 * coeff.asDiagonal() * tab.phi1.transpose()) /
        static_cast<double>(e1.size());
  }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double couple = -ws.mu3 * ws.laplacian_sym(k, i);
      if (couple != 0.0)
        hess.block(i * m, k * m, m, m).diagonal().array() += couple;
    }
  hess.diagonal().array() -= ws.zeta3;
  return hess;
}

}  // namespace

double actor_objective(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                       const std::vector<Trajectory>& trajectories,
                       const Eigen::MatrixXd& laplacian, double mu3, double zeta3) {
  return objective_impl(make_workspace(w, trajectories, laplacian, mu3, zeta3), theta);
}

Eigen::MatrixXd actor_gradient(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                               const std::vector<Trajectory>& trajectories,
                               const Eigen::MatrixXd& laplacian, double mu3, double zeta3) {
  return gradient_impl(make_workspace(w, trajectories, laplacian, mu3, zeta3), theta);
}

ActorResult actor_update(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                         const std::vector<Trajectory>& trajectories,
                         const Eigen::MatrixXd& laplacian, const ActorSettings& settings) {
  const Workspace ws = make_workspace(w, trajectories, laplacian, settings.mu3, settings.zeta3);

  ActorResult result;
  result.theta = theta;
  double value = objective_impl(ws, result.theta);
  if (!std::isfinite(value)) throw NumericalError("actor_update: objective not finite at start");
  Eigen::MatrixXd grad = gradient_impl(ws, result.theta);
  result.objective_trace.push_back(value);
  result.grad_max_norm = grad.cwiseAbs().maxCoeff();
  if (result.grad_max_norm < settings.gradient_tol) {
    result.converged = true;
    return result;
  }

  // L-BFGS pairs (kept in matrix shape) for the two-loop recursion. The weak
  // Wolfe line search below guarantees s'y > 0, so every accepted step yields
  // a usable curvature pair.
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr double kCurvature = 0.9;
  std::deque<Eigen::MatrixXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  int stalled = 0;

  // The line-search phase rides the large early ascent and settles the basin;
  // it is kept short because long first-order paths amplify input noise
  // chaotically. The damped-Newton polish below finishes the convergence.
  const int search_iterations = std::min(8, settings.max_iterations);
  for (int it = 0; it < search_iterations; ++it) {
    Eigen::MatrixXd direction = grad;
    {
      std::vector<double> alpha(s_hist.size());
      for (int h = static_cast<int>(s_hist.size()) - 1; h >= 0; --h) {
        alpha[static_cast<std::size_t>(h)] =
            rho_hist[static_cast<std::size_t>(h)] *
            s_hist[static_cast<std::size_t>(h)].cwiseProduct(direction).sum();
        direction -= alpha[static_cast<std::size_t>(h)] * y_hist[static_cast<std::size_t>(h)];
      }
      if (!s_hist.empty()) {
        const double yy = y_hist.back().squaredNorm();
        const double sy = s_hist.back().cwiseProduct(y_hist.back()).sum();
        if (yy > 0.0) direction *= sy / yy;
      }
      for (std::size_t h = 0; h < s_hist.size(); ++h) {
        const double beta = rho_hist[h] * y_hist[h].cwiseProduct(direction).sum();
        direction += (alpha[h] - beta) * s_hist[h];
      }
    }
    double slope = grad.cwiseProduct(direction).sum();
    if (slope <= 0.0) {  // not an ascent direction; fall back to the gradient
      direction = grad;
      slope = grad.squaredNorm();
    }

    // Weak Wolfe line search by bisection: sufficient increase plus a
    // curvature condition; non-finite trial values shrink the bracket. If the
    // curvature side never closes, the best sufficient-increase point is
    // taken, which keeps the ascent monotone.
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double step = it == 0 ? 1.0 / std::max(1.0, grad.norm()) : 1.0;
    bool accepted = false;
    double best_armijo_step = -1.0;
    double best_armijo_value = value;
    Eigen::MatrixXd best_armijo_grad;
    Eigen::MatrixXd candidate;
    double cand_value = value;
    Eigen::MatrixXd cand_grad;
    for (int trial = 0; trial < 60; ++trial) {
      candidate = result.theta + step * direction;
      cand_value = objective_impl(ws, candidate);
      if (!std::isfinite(cand_value) || cand_value < value + kArmijo * step * slope) {
        hi = step;  // overshoot
      } else {
        cand_grad = gradient_impl(ws, candidate);
        if (best_armijo_step < 0.0 || cand_value > best_armijo_value) {
          best_armijo_step = step;
          best_armijo_value = cand_value;
          best_armijo_grad = cand_grad;
        }
        const double new_slope = cand_grad.cwiseProduct(direction).sum();
        if (new_slope > kCurvature * slope) {
          lo = step;  // still climbing steeply: lengthen
        } else {
          accepted = true;
          break;
        }
      }
      step = std::isinf(hi) ? 2.0 * step : 0.5 * (lo + hi);
    }
    if (!accepted) {
      if (best_armijo_step < 0.0) break;  // no improving step representable
      candidate = result.theta + best_armijo_step * direction;
      cand_value = best_armijo_value;
      cand_grad = best_armijo_grad;
    }

    const Eigen::MatrixXd s_vec = candidate - result.theta;
    const Eigen::MatrixXd y_vec = grad - cand_grad;  // curvature of the negated objective
    const double sy = s_vec.cwiseProduct(y_vec).sum();
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double improvement = cand_value - value;
    result.theta = std::move(candidate);
    value = cand_value;
    grad = std::move(cand_grad);
    result.iterations = it + 1;
    result.objective_trace.push_back(value);
    result.grad_max_norm = grad.cwiseAbs().maxCoeff();
    if (result.grad_max_norm < settings.gradient_tol) {
      result.converged = true;
      break;
    }
    // Objective improvements below the double-precision resolution of |J|
    // cannot steer a value-based line search; hand over to the curvature
    // phase below.
    if (improvement < 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value))) {
      if (++stalled >= 2) break;
    } else {
      stalled = 0;
    }
  }

  // Damped-Newton phase with a trust radius. A step is accepted on a
  // resolvable objective increase, or -- once improvements fall below the
  // floating-point resolution of |J| -- on a gradient 2-norm decrease, which
  // stays measurable to machine precision. The damping ladder and the step
  // bound keep each move local, so the returned point varies smoothly with
  // the inputs instead of inheriting line-search path noise.
  if (!result.converged) {
    const int dim = static_cast<int>(result.theta.size());
    constexpr double kTrustRadius = 2.0;
    double damping = 1e-3;
    const double floor = 1e-12;
    double grad_norm2 = grad.norm();
    const int polish_iterations = std::max(60, settings.max_iterations - search_iterations);
    for (int it = 0; it < polish_iterations && !result.converged; ++it) {
      const Eigen::MatrixXd hess = hessian_impl(ws, result.theta);
      const Eigen::Map<const Eigen::VectorXd> grad_vec(grad.data(), dim);
      bool stepped = false;
      for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
        Eigen::MatrixXd system = -hess;
        system.diagonal().array() += damping;
        Eigen::LLT<Eigen::MatrixXd> llt(system);
        if (llt.info() == Eigen::Success) {
          const Eigen::VectorXd direction = llt.solve(grad_vec);
          if (direction.norm() <= kTrustRadius) {
            Eigen::MatrixXd candidate =
                result.theta + Eigen::Map<const Eigen::MatrixXd>(direction.data(),
                                                                 result.theta.rows(),
                                                                 result.theta.cols());
            const double cand_value = objective_impl(ws, candidate);
            const double guard =
                8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value));
            if (std::isfinite(cand_value) && cand_value >= value - guard) {
              Eigen::MatrixXd cand_grad = gradient_impl(ws, candidate);
              const double cand_norm2 = cand_grad.norm();
              const bool real_ascent = cand_value > value + guard;
              if (real_ascent || cand_norm2 < grad_norm2) {
                result.theta = std::move(candidate);
                value = std::max(value, cand_value);
                grad = std::move(cand_grad);
                grad_norm2 = cand_norm2;
                result.grad_max_norm = grad.cwiseAbs().maxCoeff();
                result.objective_trace.push_back(cand_value);
                damping = std::max(floor, 0.25 * damping);
                stepped = true;
              }
            }
          }
        }
        if (!stepped) damping *= 10.0;
      }
      if (!stepped) break;
      ++result.iterations;
      if (result.grad_max_norm < settings.gradient_tol) result.converged = true;
    }
  }
  return result;
}

}  // namespace corl
