#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corl/mdp.hpp"

namespace corl {

// Undirected 0/1 user-similarity network plus its graph Laplacian L = D - C.
struct CohesionGraph {
  Eigen::MatrixXd adjacency;  // N x N, symmetric, zero diagonal
  Eigen::MatrixXd laplacian;  // D - adjacency; rows sum to zero
  int k = 0;                  // neighbor count used to build it

  int size() const { return static_cast<int>(adjacency.rows()); }
  bool empty() const { return adjacency.rows() == 0; }
};

// Warm-start summary of one user: states and rewards of the first t0 tuples,
// pooled and sorted ascending. Sorting discards the temporal order so the
// coin-flip warm-start actions do not leak into the similarity measure.
Eigen::VectorXd wst_feature(const Trajectory& traj, int t0);

// Symmetrized KNN graph: an edge i~j exists when i is among the k nearest
// neighbors of j or vice versa (Euclidean distance, ties broken by lower
// index, a node never counts as its own neighbor).
CohesionGraph build_graph(const std::vector<Eigen::VectorXd>& features, int k);

// Tr(M L M'), the pairwise-similarity penalty of the columns of M. Equal to
// sum over edges {i,j} of c_ij * ||m_i - m_j||^2.
double laplacian_quadratic(const Eigen::MatrixXd& laplacian, const Eigen::MatrixXd& columns);

}  // namespace corl
