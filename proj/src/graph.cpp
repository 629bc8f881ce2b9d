#include "corl/graph.hpp"

#include <algorithm>
#include <numeric>

#include "corl/errors.hpp"

namespace corl {

Eigen::VectorXd wst_feature(const Trajectory& traj, int t0) {
  if (static_cast<int>(traj.tuples.size()) != t0)
    throw ConfigError("wst_feature: trajectory must hold exactly t0 tuples");
  if (t0 < 1) throw ConfigError("wst_feature: t0 must be >= 1");
  const auto p = traj.tuples.front().s.size();
  Eigen::VectorXd v((p + 1) * t0);
  Eigen::Index pos = 0;
  for (const Tuple& tup : traj.tuples) {
    v.segment(pos, p) = tup.s;
    v(pos + p) = tup.r;
    pos += p + 1;
  }
  std::sort(v.data(), v.data() + v.size());
  return v;
}

CohesionGraph build_graph(const std::vector<Eigen::VectorXd>& features, int k) {
  const int n = static_cast<int>(features.size());
  if (k < 1) throw ConfigError("build_graph: k must be >= 1");
  if (n < k + 1) throw ConfigError("build_graph: need at least k+1 users");

  Eigen::MatrixXd dist2(n, n);
  for (int i = 0; i < n; ++i) {
    dist2(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (features[static_cast<std::size_t>(i)] -
                        features[static_cast<std::size_t>(j)]).squaredNorm();
      dist2(i, j) = d;
      dist2(j, i) = d;
    }
  }

  CohesionGraph graph;
  graph.k = k;
  graph.adjacency = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    // k nearest neighbors of node j, excluding j itself; ties go to the
    // lower index so the graph is identical across platforms.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist2(a, j) != dist2(b, j)) return dist2(a, j) < dist2(b, j);
      return a < b;
    });
    int taken = 0;
    for (int idx : order) {
      if (idx == j) continue;
      graph.adjacency(idx, j) = 1.0;
      graph.adjacency(j, idx) = 1.0;
      if (++taken == k) break;
    }
  }

  const Eigen::VectorXd degree = graph.adjacency.rowwise().sum();
  graph.laplacian = Eigen::MatrixXd(degree.asDiagonal()) - graph.adjacency;
  return graph;
}

double laplacian_quadratic(const Eigen::MatrixXd& laplacian, const Eigen::MatrixXd& columns) {
  if (columns.cols() != laplacian.rows())
    throw ConfigError("laplacian_quadratic: column count must match graph size");
  return (columns * laplacian).cwiseProduct(columns).sum();
}

}  // namespace corl
