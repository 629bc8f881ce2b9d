#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "corl/errors.hpp"
#include "corl/graph.hpp"
#include "corl/io.hpp"
#include "oracles.hpp"

using namespace corl;

namespace {

std::vector<Eigen::VectorXd> random_features(int n, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> features;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = gauss(rng);
    features.push_back(std::move(v));
  }
  return features;
}

Trajectory make_traj(const std::vector<std::pair<double, double>>& sr) {
  Trajectory traj;
  for (const auto& [s, r] : sr) {
    Tuple tup;
    tup.s = Eigen::VectorXd::Constant(1, s);
    tup.a = 0;
    tup.r = r;
    tup.s_next = Eigen::VectorXd::Zero(1);
    traj.tuples.push_back(std::move(tup));
  }
  return traj;
}

}  // namespace

TEST_CASE("wst feature sorts the pooled states and rewards") {
  const Trajectory traj = make_traj({{3.0, 5.0}, {1.0, 2.0}});
  const Eigen::VectorXd v = wst_feature(traj, 2);
  Eigen::VectorXd want(4);
  want << 1, 2, 3, 5;
  CHECK(v == want);

  // permuting the tuples cannot change the sorted summary
  const Trajectory flipped = make_traj({{1.0, 2.0}, {3.0, 5.0}});
  CHECK(wst_feature(flipped, 2) == v);

  CHECK_THROWS_AS(wst_feature(traj, 3), ConfigError);
}

TEST_CASE("wst feature length is (p+1) * t0") {
  PopulationSpec spec = PopulationSpec::defaults();
  const auto users = generate_population(spec, 3);
  UserStreams streams(3, 0);
  const Trajectory traj = draw_warm_start(users[0], spec.init_state_cov, 10, streams);
  const Eigen::VectorXd v = wst_feature(traj, 10);
  CHECK(v.size() == 40);
  for (Eigen::Index i = 1; i < v.size(); ++i) CHECK(v(i - 1) <= v(i));
}

TEST_CASE("graph: identical features with k=1 resolve ties by index") {
  // all pairwise distances are zero, so every node's single neighbor is the
  // lowest other index: 0 and 1 pick each other, 2 picks 0
  std::vector<Eigen::VectorXd> features(3, Eigen::VectorXd::Constant(2, 1.0));
  const CohesionGraph g = build_graph(features, 1);
  Eigen::MatrixXd want(3, 3);
  want << 0, 1, 1, 1, 0, 0, 1, 0, 0;
  CHECK(g.adjacency == want);
  CHECK(g.adjacency == oracle::brute_knn_adjacency(features, 1));
}

TEST_CASE("graph: three points on a line with k=1") {
  std::vector<Eigen::VectorXd> features{Eigen::VectorXd::Constant(1, 0.0),
                                        Eigen::VectorXd::Constant(1, 1.0),
                                        Eigen::VectorXd::Constant(1, 10.0)};
  const CohesionGraph g = build_graph(features, 1);
  // 0 and 1 choose each other; 2's nearest is 1, so OR-symmetrization adds 1-2.
  CHECK(g.adjacency(0, 1) == 1.0);
  CHECK(g.adjacency(1, 2) == 1.0);
  CHECK(g.adjacency(0, 2) == 0.0);
  CHECK(g.adjacency == oracle::brute_knn_adjacency(features, 1));
}

TEST_CASE("graph: matches the exhaustive oracle on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 7);  // 4..10
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 2));
    const auto features = random_features(n, 3, rng);
    const CohesionGraph g = build_graph(features, k);
    CHECK(g.adjacency == oracle::brute_knn_adjacency(features, k));
  }
}

TEST_CASE("graph: structural invariants hold") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 8);
    const auto features = random_features(n, 4, rng);
    const CohesionGraph g = build_graph(features, 2);
    CHECK(g.adjacency == g.adjacency.transpose().eval());
    CHECK(g.adjacency.diagonal().isZero(0.0));
    CHECK(g.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.laplacian, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("graph: edge set grows with k") {
  std::mt19937_64 rng(7);
  const auto features = random_features(9, 3, rng);
  for (int k = 1; k + 2 < 9; ++k) {
    const CohesionGraph small = build_graph(features, k);
    const CohesionGraph big = build_graph(features, k + 1);
    CHECK(((big.adjacency - small.adjacency).array() >= -1e-15).all());
  }
}

TEST_CASE("graph: k >= N is rejected") {
  std::mt19937_64 rng(3);
  const auto features = random_features(4, 2, rng);
  CHECK_THROWS_AS(build_graph(features, 4), ConfigError);
  CHECK_THROWS_AS(build_graph(features, 0), ConfigError);
}

TEST_CASE("laplacian quadratic: null space, scaling, two-node instance") {
  std::vector<Eigen::VectorXd> features(3, Eigen::VectorXd::Constant(2, 0.5));
  const CohesionGraph g = build_graph(features, 1);

  const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(4, 3, 2.5);
  CHECK(std::abs(laplacian_quadratic(g.laplacian, constant)) < 1e-12);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = gauss(rng);
  const double base = laplacian_quadratic(g.laplacian, m);
  CHECK(laplacian_quadratic(g.laplacian, 3.0 * m) == doctest::Approx(9.0 * base).epsilon(1e-12));

  // two nodes, one edge, scalar columns 0 and 1: both routes evaluate to 1
  Eigen::MatrixXd lap(2, 2);
  lap << 1, -1, -1, 1;
  Eigen::MatrixXd cols(1, 2);
  cols << 0, 1;
  const double trace_form = laplacian_quadratic(lap, cols);
  double pair_sum = 0.0;  // sum over unordered pairs {i<j} of c_ij ||m_i - m_j||^2
  pair_sum += 1.0 * (cols.col(0) - cols.col(1)).squaredNorm();
  CHECK(trace_form == doctest::Approx(pair_sum).epsilon(1e-12));
}

TEST_CASE("laplacian quadratic: trace form equals the pairwise sum") {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const auto features = random_features(n, 3, rng);
    const CohesionGraph g = build_graph(features, 2);
    Eigen::MatrixXd m(5, n);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
    double pair_sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        pair_sum += g.adjacency(i, j) * (m.col(i) - m.col(j)).squaredNorm();
    CHECK(std::abs(laplacian_quadratic(g.laplacian, m) - pair_sum) < 1e-10);
  }
}

TEST_CASE("laplacian quadratic: dimension mismatch is rejected") {
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd m(2, 4);
  CHECK_THROWS_AS(laplacian_quadratic(lap, m), ConfigError);
}

TEST_CASE("edge list export lists each undirected edge once") {
  std::vector<Eigen::VectorXd> features{Eigen::VectorXd::Constant(1, 0.0),
                                        Eigen::VectorXd::Constant(1, 1.0),
                                        Eigen::VectorXd::Constant(1, 10.0)};
  const CohesionGraph g = build_graph(features, 1);
  CHECK(io::edge_list(g) == "0 1\n1 2\n");
}
