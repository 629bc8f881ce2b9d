#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "corl/evaluate.hpp"
#include "corl/graph.hpp"
#include "corl/mdp.hpp"
#include "corl/runner.hpp"

namespace corl::io {

// Line-oriented JSON: one user or one trajectory per line. Field names are
// documented in the README.
std::string population_to_jsonl(const std::vector<UserModel>& users);
std::vector<UserModel> population_from_jsonl(const std::string& text);
std::string trajectories_to_jsonl(const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> trajectories_from_jsonl(const std::string& text);

// Plain "i j" lines, one undirected edge each, i < j.
std::string edge_list(const CohesionGraph& graph);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Numeric CSV, one matrix row per line, full double precision.
std::string matrix_to_csv(const Eigen::MatrixXd& matrix);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

// Config round trips.
std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string eval_config_to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const std::string& text);

// Per-user evaluation output, columns run_seed,user_id,eta.
std::string eta_to_csv(std::uint64_t run_seed, const Eigen::VectorXd& per_user);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Serialize a finished run: config.json, trajectories.jsonl, graph.edges
// (cohesion methods only), theta.csv, w.csv.
void write_run_result(const std::string& dir, const ExperimentConfig& config,
                      const RunResult& result);

}  // namespace corl::io
