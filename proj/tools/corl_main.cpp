#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "corl/errors.hpp"
#include "corl/evaluate.hpp"
#include "corl/io.hpp"
#include "corl/runner.hpp"
#include "corl/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using namespace corl;

struct ExperimentFlags {
  std::string method = "cohesion2";
  int horizon = 80;
  int warm_start = 10;
  double gamma = 0.8;
  double mu1 = 0.1;
  double mu2 = -1.0;   // < 0: derive 0.01 * mu1
  double mu3 = -1.0;   // < 0: derive mu1
  double zeta1 = -1.0; // < 0: apply the ridge rule
  double zeta2 = -1.0;
  double zeta3 = -1.0;
  double zeta_a = 0.1;
  double zeta_c = 0.1;
  int knn = 8;
  std::uint64_t seed = 1;
  int groups = 3;
  int group_size = 15;
  double sigma_b = 0.05;
  double sigma_s = 0.5;
  double sigma_r = 1.0;
  int state_dim = 3;
  int actor_max_iterations = 200;
  double actor_gradient_tol = 1e-6;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& flags) {
  app->add_option("--method", flags.method, "separate | cohesion1 | cohesion2");
  app->add_option("--T", flags.horizon, "online horizon (tuples per user)");
  app->add_option("--T0", flags.warm_start, "warm-start length");
  app->add_option("--gamma", flags.gamma, "discount factor in [0,1)");
  app->add_option("--mu1", flags.mu1, "critic cohesion weight");
  app->add_option("--mu2", flags.mu2, "second-stage cohesion weight (default 0.01*mu1)");
  app->add_option("--mu3", flags.mu3, "actor cohesion weight (default mu1)");
  app->add_option("--zeta1", flags.zeta1, "critic ridge (default by rule)");
  app->add_option("--zeta2", flags.zeta2, "second-stage ridge (default by rule)");
  app->add_option("--zeta3", flags.zeta3, "actor ridge (default by rule)");
  app->add_option("--zeta-a", flags.zeta_a, "separate baseline actor ridge");
  app->add_option("--zeta-c", flags.zeta_c, "separate baseline critic ridge");
  app->add_option("--K", flags.knn, "neighbor count for the similarity graph");
  app->add_option("--seed", flags.seed, "master seed");
  app->add_option("--groups", flags.groups, "number of population groups");
  app->add_option("--group-size", flags.group_size, "users per group");
  app->add_option("--sigma-b", flags.sigma_b, "coefficient perturbation std dev");
  app->add_option("--sigma-s", flags.sigma_s, "state noise std dev");
  app->add_option("--sigma-r", flags.sigma_r, "reward noise std dev");
  app->add_option("--p", flags.state_dim, "state dimension (>= 3)");
  app->add_option("--actor-iters", flags.actor_max_iterations, "actor iteration cap per step");
  app->add_option("--actor-tol", flags.actor_gradient_tol, "actor gradient tolerance");
}

ExperimentConfig resolve_experiment(const ExperimentFlags& flags) {
  ExperimentConfig config = make_config(method_from_name(flags.method), flags.gamma,
                                        flags.mu1, flags.seed);
  if (flags.mu2 >= 0.0) config.mu2 = flags.mu2;
  if (flags.mu3 >= 0.0) config.mu3 = flags.mu3;
  const double zeta = std::min({config.mu1, config.mu2, config.mu3}) <= 1e-4 ? 0.1 : 0.0;
  config.zeta1 = flags.zeta1 >= 0.0 ? flags.zeta1 : zeta;
  config.zeta2 = flags.zeta2 >= 0.0 ? flags.zeta2 : zeta;
  config.zeta3 = flags.zeta3 >= 0.0 ? flags.zeta3 : zeta;
  config.zeta_a = flags.zeta_a;
  config.zeta_c = flags.zeta_c;
  config.horizon = flags.horizon;
  config.warm_start = flags.warm_start;
  config.knn = flags.knn;
  config.actor_max_iterations = flags.actor_max_iterations;
  config.actor_gradient_tol = flags.actor_gradient_tol;

  PopulationSpec pop = PopulationSpec::defaults();
  pop.group_size = flags.group_size;
  pop.coef_noise_sd = flags.sigma_b;
  pop.state_noise_sd = flags.sigma_s;
  pop.reward_noise_sd = flags.sigma_r;
  pop.state_dim = flags.state_dim;
  pop.init_state_cov = Eigen::MatrixXd::Identity(flags.state_dim, flags.state_dim);
  if (flags.groups != static_cast<int>(pop.group_templates.size())) {
    if (flags.groups < 1 || flags.groups > static_cast<int>(pop.group_templates.size()))
      throw corl::ConfigError("--groups must be between 1 and 3 (built-in templates)");
    pop.group_templates.resize(static_cast<std::size_t>(flags.groups));
    pop.groups = flags.groups;
  }
  config.population = pop;
  return config;
}

int cmd_run(const ExperimentFlags& flags, const std::string& out_dir,
            const EvalConfig& eval_flags) {
  const ExperimentConfig config = resolve_experiment(flags);
  const RunResult result = run_online(config);

  EvalConfig eval = eval_flags;
  eval.seed = config.seed;
  const std::vector<UserModel> users = generate_population(config.population, config.seed);
  const ElrarResult score = elrar(users, result.theta, config.population.init_state_cov, eval);

  std::printf("method=%s gamma=%g T=%d T0=%d seed=%llu elrar=%.2f (run %.2fs)\n",
              method_name(config.method).c_str(), config.gamma, config.horizon,
              config.warm_start, static_cast<unsigned long long>(config.seed), score.mean,
              result.wall_time_s);
  if (!out_dir.empty()) {
    io::write_run_result(out_dir, config, result);
    io::write_file((fs::path(out_dir) / "population.jsonl").string(),
                   io::population_to_jsonl(users));
    io::write_file((fs::path(out_dir) / "eta.csv").string(),
                   io::eta_to_csv(config.seed, score.per_user));
    std::printf("wrote %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& run_dir, EvalConfig eval, bool eval_seed_set) {
  const ExperimentConfig config = io::experiment_config_from_json(
      io::read_file((fs::path(run_dir) / "config.json").string()));
  const Eigen::MatrixXd theta =
      io::matrix_from_csv(io::read_file((fs::path(run_dir) / "theta.csv").string()));
  if (!eval_seed_set) eval.seed = config.seed;
  const std::vector<UserModel> users = generate_population(config.population, config.seed);
  const ElrarResult score = elrar(users, theta, config.population.init_state_cov, eval);
  io::write_file((fs::path(run_dir) / "eta.csv").string(),
                 io::eta_to_csv(eval.seed, score.per_user));
  std::printf("elrar=%.2f over %d users (eta.csv updated)\n", score.mean,
              static_cast<int>(users.size()));
  return 0;
}

int cmd_graph_dump(const ExperimentFlags& flags, const std::string& out_path) {
  const ExperimentConfig config = resolve_experiment(flags);
  const std::vector<UserModel> users = generate_population(config.population, config.seed);
  std::vector<Eigen::VectorXd> features;
  features.reserve(users.size());
  for (const UserModel& user : users) {
    UserStreams streams(config.seed, user.user_id);
    const Trajectory warm =
        draw_warm_start(user, config.population.init_state_cov, config.warm_start, streams);
    features.push_back(wst_feature(warm, config.warm_start));
  }
  const CohesionGraph graph = build_graph(features, config.knn);
  const std::string edges = io::edge_list(graph);
  if (out_path.empty()) {
    std::cout << edges;
  } else {
    io::write_file(out_path, edges);
    std::printf("wrote %s (%d nodes, K=%d)\n", out_path.c_str(), graph.size(), graph.k);
  }
  return 0;
}

int cmd_sweep(const ExperimentFlags& flags, const std::string& setting,
              std::vector<double> gammas, std::vector<std::string> method_names,
              int seeds, int workers, const std::string& out_dir,
              const std::string& config_path, const EvalConfig& eval_flags) {
  SweepSpec spec;
  if (!config_path.empty()) {
    spec = sweep_spec_from_json(io::read_file(config_path));
  } else {
    spec.setting = setting_from_name(setting);
    spec.experiment = resolve_experiment(flags);
    spec.eval = eval_flags;
    spec.base_seed = flags.seed;
  }
  if (!gammas.empty()) spec.gammas = gammas;
  if (!method_names.empty()) {
    spec.methods.clear();
    for (const std::string& name : method_names) spec.methods.push_back(method_from_name(name));
  }
  if (seeds > 0) spec.seeds = seeds;
  if (workers > 0) spec.workers = workers;
  if (!out_dir.empty()) spec.out_dir = out_dir;

  const SweepResult result = run_sweep(spec);
  std::cout << render_table(result.cells);
  if (result.failures > 0) {
    std::fprintf(stderr, "%d cell(s) failed\n", result.failures);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-cohesion online actor-critic learning on a simulated "
               "mobile-health population"};
  app.require_subcommand(1);

  ExperimentFlags flags;
  EvalConfig eval_flags;
  std::string out_dir;
  std::string run_dir;
  std::string out_path;
  std::string setting = "single";
  std::vector<double> gammas;
  std::vector<std::string> method_names;
  int seeds = 0;
  int workers = 0;
  std::string config_path;
  bool eval_seed_set = false;

  CLI::App* run = app.add_subcommand("run", "one online run plus policy evaluation");
  add_experiment_flags(run, flags);
  run->add_option("--out", out_dir, "output directory for the run artifacts");
  run->add_option("--T-eval", eval_flags.rollout_length, "evaluation rollout length");
  run->add_option("--burn-in", eval_flags.burn_in, "evaluation burn-in");

  CLI::App* sweep = app.add_subcommand("sweep", "experiment grid over methods/gammas/seeds");
  add_experiment_flags(sweep, flags);
  sweep->add_option("--setting", setting, "single | s1 | s2 | s3");
  sweep->add_option("--gamma-list", gammas, "gamma values (overrides default grid)");
  sweep->add_option("--methods", method_names, "methods to compare");
  sweep->add_option("--seeds", seeds, "Monte Carlo seeds per cell");
  sweep->add_option("--workers", workers, "concurrent cells");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--config", config_path, "load a sweep config echo and rerun it");
  sweep->add_option("--T-eval", eval_flags.rollout_length, "evaluation rollout length");
  sweep->add_option("--burn-in", eval_flags.burn_in, "evaluation burn-in");

  CLI::App* eval_cmd = app.add_subcommand("eval", "re-evaluate a saved run directory");
  eval_cmd->add_option("--run-dir", run_dir, "directory written by `run`")->required();
  eval_cmd->add_option("--T-eval", eval_flags.rollout_length, "evaluation rollout length");
  eval_cmd->add_option("--burn-in", eval_flags.burn_in, "evaluation burn-in");
  eval_cmd->add_option("--eval-seed", eval_flags.seed, "evaluation seed")
      ->each([&](const std::string&) { eval_seed_set = true; });

  CLI::App* graph = app.add_subcommand("graph-dump", "emit the learned similarity graph");
  add_experiment_flags(graph, flags);
  graph->add_option("--out", out_path, "edge-list file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags, out_dir, eval_flags);
    if (sweep->parsed())
      return cmd_sweep(flags, setting, gammas, method_names, seeds, workers, out_dir,
                       config_path, eval_flags);
    if (eval_cmd->parsed()) return cmd_eval(run_dir, eval_flags, eval_seed_set);
    if (graph->parsed()) return cmd_graph_dump(flags, out_path);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
  return 0;
}
