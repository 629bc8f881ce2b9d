#include "corl/critic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "corl/errors.hpp"
#include "corl/features.hpp"

namespace corl {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Sparse uN x uN coupled system F1 - gamma F3 + (mu1 L + zeta1 I) (x) I_u.
// Diagonal blocks are dense u x u; off-diagonal coupling blocks are scalar
// multiples of the identity, one entry per feature index.
SpMat coupled_system(const BlockOperators& ops, const Eigen::MatrixXd& laplacian,
                     double gamma, double mu1, double zeta1) {
  const int u = ops.feature_dim;
  const int n = ops.users;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * u * u + static_cast<std::size_t>(n) * n * u);
  for (int b = 0; b < n; ++b) {
    const double diag_couple = mu1 * laplacian(b, b) + zeta1;
    Eigen::MatrixXd block = ops.gram[static_cast<std::size_t>(b)] -
                            gamma * ops.cross[static_cast<std::size_t>(b)];
    block.diagonal().array() += diag_couple;
    for (int c = 0; c < u; ++c)
      for (int rw = 0; rw < u; ++rw)
        triplets.emplace_back(b * u + rw, b * u + c, block(rw, c));
    for (int j = 0; j < n; ++j) {
      if (j == b) continue;
      const double couple = mu1 * laplacian(b, j);
      if (couple == 0.0) continue;
      for (int c = 0; c < u; ++c) triplets.emplace_back(b * u + c, j * u + c, couple);
    }
  }
  SpMat mat(n * u, n * u);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return mat;
}

// (mu L + zeta I) (x) I_u as a sparse matrix.
SpMat laplacian_kron_identity(const Eigen::MatrixXd& laplacian, int u, double mu, double zeta) {
  const int n = static_cast<int>(laplacian.rows());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * n * u);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double entry = mu * laplacian(i, j) + (i == j ? zeta : 0.0);
      if (entry == 0.0) continue;
      for (int c = 0; c < u; ++c) triplets.emplace_back(i * u + c, j * u + c, entry);
    }
  }
  SpMat mat(n * u, n * u);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return mat;
}

// F2 vec(R): per-user segments X_n r_n.
Eigen::VectorXd feature_weighted_rewards(const BlockOperators& ops,
                                         const Eigen::MatrixXd& rewards) {
  const int u = ops.feature_dim;
  Eigen::VectorXd b(static_cast<Eigen::Index>(ops.users) * u);
  for (int n = 0; n < ops.users; ++n)
    b.segment(static_cast<Eigen::Index>(n) * u, u) =
        ops.x[static_cast<std::size_t>(n)] * rewards.col(n);
  return b;
}

void check_shapes(const BlockOperators& ops, const Eigen::MatrixXd& laplacian,
                  const Eigen::MatrixXd& rewards) {
  if (laplacian.rows() != ops.users || laplacian.cols() != ops.users)
    throw ConfigError("critic update: Laplacian must be N x N");
  if (rewards.rows() != ops.horizon || rewards.cols() != ops.users)
    throw ConfigError("critic update: reward matrix must be t x N");
}

}  // namespace

UserDesign build_design(const Trajectory& traj, const Eigen::VectorXd& theta) {
  const auto t = static_cast<Eigen::Index>(traj.tuples.size());
  if (t == 0) throw ConfigError("build_design: empty trajectory");
  const auto u = 2 * traj.tuples.front().s.size() + 2;
  UserDesign design;
  design.X.resize(u, t);
  design.Y.resize(u, t);
  design.r.resize(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    const Tuple& tup = traj.tuples[static_cast<std::size_t>(i)];
    design.X.col(i) = value_feature(tup.s, tup.a);
    design.Y.col(i) = next_value_feature(theta, tup.s_next);
    design.r(i) = tup.r;
  }
  return design;
}

BlockOperators assemble_block_operators(const std::vector<UserDesign>& designs) {
  if (designs.empty()) throw ConfigError("assemble_block_operators: no designs");
  BlockOperators ops;
  ops.users = static_cast<int>(designs.size());
  ops.feature_dim = static_cast<int>(designs.front().X.rows());
  ops.horizon = static_cast<int>(designs.front().X.cols());
  for (const UserDesign& d : designs) {
    if (d.X.rows() != ops.feature_dim || d.X.cols() != ops.horizon)
      throw ConfigError("assemble_block_operators: all users must share u and t");
    if (d.Y.rows() != d.X.rows() || d.Y.cols() != d.X.cols())
      throw ConfigError("assemble_block_operators: X and Y must have equal shape");
    if (d.r.size() != d.X.cols())
      throw ConfigError("assemble_block_operators: reward length must match t");
  }
  ops.gram.resize(designs.size());
  ops.cross.resize(designs.size());
  ops.x.resize(designs.size());
#pragma omp parallel for schedule(static)
  for (int n = 0; n < ops.users; ++n) {
    const UserDesign& d = designs[static_cast<std::size_t>(n)];
    ops.gram[static_cast<std::size_t>(n)] = d.X * d.X.transpose();
    ops.cross[static_cast<std::size_t>(n)] = d.X * d.Y.transpose();
    ops.x[static_cast<std::size_t>(n)] = d.X;
  }
  return ops;
}

Eigen::VectorXd lstdq_separate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const Eigen::VectorXd& r, double gamma, double zeta) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw ConfigError("lstdq_separate: X and Y must have equal shape");
  if (r.size() != X.cols()) throw ConfigError("lstdq_separate: reward length must match t");
  Eigen::MatrixXd system = X * (X - gamma * Y).transpose();
  system.diagonal().array() += zeta;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const Eigen::VectorXd w = lu.solve(X * r);
  if (!w.allFinite()) throw NumericalError("lstdq_separate: singular system");
  return w;
}

Eigen::MatrixXd critic_update_cohesion1(const BlockOperators& ops,
                                        const Eigen::MatrixXd& laplacian,
                                        const Eigen::MatrixXd& rewards, double gamma,
                                        double mu1, double zeta1, double mu2, double zeta2) {
  check_shapes(ops, laplacian, rewards);
  const int u = ops.feature_dim;
  const SpMat P = coupled_system(ops, laplacian, gamma, mu1, zeta1);
  const SpMat penalty = laplacian_kron_identity(laplacian, u, mu2, zeta2);
  const Eigen::VectorXd b = feature_weighted_rewards(ops, rewards);

  // The normal-equation matrix B = P'P + penalty squares P's condition
  // number, so the solve is split: the dominant part goes through P itself
  // and the penalty enters as the exact correction
  //   w = w0 - B^{-1} (penalty w0),  P w0 = b,
  // which is algebraically identical to B^{-1} P' b for nonsingular P.
  Eigen::SparseLU<SpMat> lu(P);
  if (lu.info() == Eigen::Success) {
    const Eigen::VectorXd w0 = lu.solve(b);
    if (w0.allFinite()) {
      Eigen::VectorXd w = w0;
      if (penalty.nonZeros() > 0) {
        SpMat B = SpMat(P.transpose()) * P;
        B += penalty;
        Eigen::SimplicialLLT<SpMat> llt(B);
        if (llt.info() != Eigen::Success)
          throw NumericalError("critic_update_cohesion1: SPD factorization failed");
        w -= llt.solve(penalty * w0);
      }
      if (!w.allFinite())
        throw NumericalError("critic_update_cohesion1: solve produced non-finite values");
      return Eigen::Map<const Eigen::MatrixXd>(w.data(), u, ops.users);
    }
  }

  // Singular P: fall back to the normal-equation route, which Theorem-style
  // regularization keeps positive definite.
  SpMat B = SpMat(P.transpose()) * P;
  B += penalty;
  Eigen::SimplicialLLT<SpMat> llt(B);
  if (llt.info() != Eigen::Success)
    throw NumericalError("critic_update_cohesion1: SPD factorization failed");
  const Eigen::VectorXd w = llt.solve(P.transpose() * b);
  if (!w.allFinite()) throw NumericalError("critic_update_cohesion1: solve produced non-finite values");
  return Eigen::Map<const Eigen::MatrixXd>(w.data(), u, ops.users);
}

Eigen::MatrixXd critic_update_cohesion2(const BlockOperators& ops,
                                        const Eigen::MatrixXd& laplacian,
                                        const Eigen::MatrixXd& rewards, double gamma,
                                        double mu1, double zeta1) {
  check_shapes(ops, laplacian, rewards);
  const int u = ops.feature_dim;
  const SpMat system = coupled_system(ops, laplacian, gamma, mu1, zeta1);
  Eigen::SparseLU<SpMat> lu(system);
  if (lu.info() != Eigen::Success)
    throw NumericalError("critic_update_cohesion2: singular system");
  const Eigen::VectorXd w = lu.solve(feature_weighted_rewards(ops, rewards));
  if (!w.allFinite()) throw NumericalError("critic_update_cohesion2: solve produced non-finite values");
  return Eigen::Map<const Eigen::MatrixXd>(w.data(), u, ops.users);
}

SpdCheck check_spd(const Eigen::MatrixXd& P, const Eigen::MatrixXd& laplacian,
                   double mu2, double zeta2) {
  const auto n = laplacian.rows();
  if (n == 0 || P.rows() != P.cols() || P.rows() % n != 0)
    throw ConfigError("check_spd: P must be uN x uN for the given Laplacian");
  const auto u = P.rows() / n;
  Eigen::MatrixXd B = P.transpose() * P;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double entry = mu2 * laplacian(i, j) + (i == j ? zeta2 : 0.0);
      if (entry != 0.0) B.block(i * u, j * u, u, u).diagonal().array() += entry;
    }

  SpdCheck result;
  result.symmetry_defect = (B - B.transpose()).cwiseAbs().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  result.is_spd = llt.info() == Eigen::Success && result.symmetry_defect < 1e-10;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B, Eigen::EigenvaluesOnly);
  result.min_eigenvalue = eig.eigenvalues().minCoeff();
  return result;
}

}  // namespace corl
