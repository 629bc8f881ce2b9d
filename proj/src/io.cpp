#include "corl/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corl/errors.hpp"

namespace corl::io {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& x : arr) v(i++) = x.get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r)));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  if (nr == 0) return {};
  const auto nc = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r)
    m.row(r) = vector_from_json(rows[static_cast<std::size_t>(r)]).transpose();
  return m;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

json population_spec_to_json(const PopulationSpec& spec) {
  json j;
  j["groups"] = spec.groups;
  j["group_size"] = spec.group_size;
  json templates = json::array();
  for (const auto& tpl : spec.group_templates) templates.push_back(vector_to_json(tpl));
  j["group_templates"] = templates;
  j["coef_noise_sd"] = spec.coef_noise_sd;
  j["state_noise_sd"] = spec.state_noise_sd;
  j["reward_noise_sd"] = spec.reward_noise_sd;
  j["state_dim"] = spec.state_dim;
  j["init_state_cov"] = matrix_to_json(spec.init_state_cov);
  return j;
}

PopulationSpec population_spec_from_json(const json& j) {
  PopulationSpec spec;
  spec.groups = j.at("groups").get<int>();
  spec.group_size = j.at("group_size").get<int>();
  spec.group_templates.clear();
  for (const auto& tpl : j.at("group_templates")) spec.group_templates.push_back(vector_from_json(tpl));
  spec.coef_noise_sd = j.at("coef_noise_sd").get<double>();
  spec.state_noise_sd = j.at("state_noise_sd").get<double>();
  spec.reward_noise_sd = j.at("reward_noise_sd").get<double>();
  spec.state_dim = j.at("state_dim").get<int>();
  spec.init_state_cov = matrix_from_json(j.at("init_state_cov"));
  return spec;
}

}  // namespace

std::string population_to_jsonl(const std::vector<UserModel>& users) {
  std::ostringstream out;
  for (const UserModel& user : users) {
    json j;
    j["user_id"] = user.user_id;
    j["group"] = user.group;
    j["coef"] = vector_to_json(user.coef);
    j["state_noise_sd"] = user.state_noise_sd;
    j["reward_noise_sd"] = user.reward_noise_sd;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<UserModel> population_from_jsonl(const std::string& text) {
  std::vector<UserModel> users;
  for (const std::string& line : split_lines(text)) {
    const json j = json::parse(line);
    UserModel user;
    user.user_id = j.at("user_id").get<int>();
    user.group = j.at("group").get<int>();
    user.coef = vector_from_json(j.at("coef"));
    user.state_noise_sd = j.at("state_noise_sd").get<double>();
    user.reward_noise_sd = j.at("reward_noise_sd").get<double>();
    users.push_back(std::move(user));
  }
  return users;
}

std::string trajectories_to_jsonl(const std::vector<Trajectory>& trajectories) {
  std::ostringstream out;
  for (const Trajectory& traj : trajectories) {
    json j;
    j["user_id"] = traj.user_id;
    json tuples = json::array();
    for (const Tuple& tup : traj.tuples) {
      json jt;
      jt["s"] = vector_to_json(tup.s);
      jt["a"] = tup.a;
      jt["r"] = tup.r;
      jt["s_next"] = vector_to_json(tup.s_next);
      tuples.push_back(std::move(jt));
    }
    j["tuples"] = std::move(tuples);
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<Trajectory> trajectories_from_jsonl(const std::string& text) {
  std::vector<Trajectory> trajectories;
  for (const std::string& line : split_lines(text)) {
    const json j = json::parse(line);
    Trajectory traj;
    traj.user_id = j.at("user_id").get<int>();
    for (const auto& jt : j.at("tuples")) {
      Tuple tup;
      tup.s = vector_from_json(jt.at("s"));
      tup.a = jt.at("a").get<int>();
      tup.r = jt.at("r").get<double>();
      tup.s_next = vector_from_json(jt.at("s_next"));
      traj.tuples.push_back(std::move(tup));
    }
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

std::string edge_list(const CohesionGraph& graph) {
  std::ostringstream out;
  const int n = graph.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (graph.adjacency(i, j) != 0.0) out << i << ' ' << j << '\n';
  return out.str();
}

std::string format_double(double value) {
  char buffer[64];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, res.ptr);
}

std::string matrix_to_csv(const Eigen::MatrixXd& matrix) {
  std::ostringstream out;
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(matrix(r, c));
    }
    out << '\n';
  }
  return out.str();
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) return {};
  std::vector<std::vector<double>> rows;
  for (const std::string& line : lines) {
    std::vector<double> row;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (rows[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(m.cols()))
      throw ConfigError("matrix_from_csv: ragged rows");
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["method"] = method_name(config.method);
  j["horizon"] = config.horizon;
  j["warm_start"] = config.warm_start;
  j["gamma"] = config.gamma;
  j["mu1"] = config.mu1;
  j["mu2"] = config.mu2;
  j["mu3"] = config.mu3;
  j["zeta1"] = config.zeta1;
  j["zeta2"] = config.zeta2;
  j["zeta3"] = config.zeta3;
  j["zeta_a"] = config.zeta_a;
  j["zeta_c"] = config.zeta_c;
  j["knn"] = config.knn;
  j["seed"] = config.seed;
  j["actor_max_iterations"] = config.actor_max_iterations;
  j["actor_gradient_tol"] = config.actor_gradient_tol;
  j["population"] = population_spec_to_json(config.population);
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig config;
  config.method = method_from_name(j.at("method").get<std::string>());
  config.horizon = j.at("horizon").get<int>();
  config.warm_start = j.at("warm_start").get<int>();
  config.gamma = j.at("gamma").get<double>();
  config.mu1 = j.at("mu1").get<double>();
  config.mu2 = j.at("mu2").get<double>();
  config.mu3 = j.at("mu3").get<double>();
  config.zeta1 = j.at("zeta1").get<double>();
  config.zeta2 = j.at("zeta2").get<double>();
  config.zeta3 = j.at("zeta3").get<double>();
  config.zeta_a = j.at("zeta_a").get<double>();
  config.zeta_c = j.at("zeta_c").get<double>();
  config.knn = j.at("knn").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.actor_max_iterations = j.at("actor_max_iterations").get<int>();
  config.actor_gradient_tol = j.at("actor_gradient_tol").get<double>();
  config.population = population_spec_from_json(j.at("population"));
  return config;
}

std::string eval_config_to_json(const EvalConfig& config) {
  json j;
  j["rollout_length"] = config.rollout_length;
  j["burn_in"] = config.burn_in;
  j["seed"] = config.seed;
  return j.dump(2);
}

EvalConfig eval_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  EvalConfig config;
  config.rollout_length = j.at("rollout_length").get<int>();
  config.burn_in = j.at("burn_in").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

std::string eta_to_csv(std::uint64_t run_seed, const Eigen::VectorXd& per_user) {
  std::ostringstream out;
  out << "run_seed,user_id,eta\n";
  for (Eigen::Index i = 0; i < per_user.size(); ++i)
    out << run_seed << ',' << i << ',' << format_double(per_user(i)) << '\n';
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_run_result(const std::string& dir, const ExperimentConfig& config,
                      const RunResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_file((fs::path(dir) / "config.json").string(), experiment_config_to_json(config));
  write_file((fs::path(dir) / "trajectories.jsonl").string(),
             trajectories_to_jsonl(result.trajectories));
  write_file((fs::path(dir) / "theta.csv").string(), matrix_to_csv(result.theta));
  write_file((fs::path(dir) / "w.csv").string(), matrix_to_csv(result.w));
  if (!result.graph.empty())
    write_file((fs::path(dir) / "graph.edges").string(), edge_list(result.graph));
}

}  // namespace corl::io
