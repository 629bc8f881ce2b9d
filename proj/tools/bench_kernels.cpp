// Compares the OpenMP kernels against their serial reference paths:
// policy-evaluation rollouts, design assembly, and sweep cells.

#include <benchmark/benchmark.h>

#include "corl/critic.hpp"
#include "corl/evaluate.hpp"
#include "corl/features.hpp"
#include "corl/runner.hpp"
#include "corl/sweep.hpp"

namespace {

using namespace corl;

struct Fixture {
  std::vector<UserModel> users;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd sigma0;
  std::vector<UserDesign> designs;

  Fixture() {
    PopulationSpec spec = PopulationSpec::defaults();
    users = generate_population(spec, 7);
    sigma0 = spec.init_state_cov;
    theta = Eigen::MatrixXd::Zero(policy_dim(spec.state_dim), spec.num_users());
    designs.reserve(users.size());
    for (const UserModel& user : users) {
      UserStreams streams(7, user.user_id);
      const Trajectory warm = draw_warm_start(user, sigma0, 80, streams);
      designs.push_back(build_design(warm, theta.col(user.user_id)));
    }
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_ElrarSerial(benchmark::State& state) {
  Fixture& f = fixture();
  EvalConfig eval;
  eval.rollout_length = 2000;
  eval.burn_in = 400;
  for (auto _ : state) {
    const ElrarResult r = elrar(f.users, f.theta, f.sigma0, eval, /*parallel=*/false);
    benchmark::DoNotOptimize(r.mean);
  }
}
BENCHMARK(BM_ElrarSerial)->Unit(benchmark::kMillisecond);

void BM_ElrarParallel(benchmark::State& state) {
  Fixture& f = fixture();
  EvalConfig eval;
  eval.rollout_length = 2000;
  eval.burn_in = 400;
  for (auto _ : state) {
    const ElrarResult r = elrar(f.users, f.theta, f.sigma0, eval, /*parallel=*/true);
    benchmark::DoNotOptimize(r.mean);
  }
}
BENCHMARK(BM_ElrarParallel)->Unit(benchmark::kMillisecond);

void BM_BlockAssembly(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) {
    const BlockOperators ops = assemble_block_operators(f.designs);
    benchmark::DoNotOptimize(ops.gram.front()(0, 0));
  }
}
BENCHMARK(BM_BlockAssembly)->Unit(benchmark::kMillisecond);

void BM_SweepCellsSerial(benchmark::State& state) {
  SweepSpec spec;
  spec.setting = Setting::Single;
  spec.gammas = {0.4};
  spec.methods = {Method::Separate};
  spec.seeds = 2;
  spec.workers = 1;
  spec.experiment = make_config(Method::Separate, 0.4, 0.1, 1);
  spec.experiment.horizon = 20;
  spec.experiment.warm_start = 8;
  spec.experiment.population.group_size = 4;
  spec.eval.rollout_length = 500;
  spec.eval.burn_in = 100;
  for (auto _ : state) {
    const SweepResult r = run_sweep(spec);
    benchmark::DoNotOptimize(r.cells.front().elrar);
  }
}
BENCHMARK(BM_SweepCellsSerial)->Unit(benchmark::kMillisecond);

void BM_SweepCellsParallel(benchmark::State& state) {
  SweepSpec spec;
  spec.setting = Setting::Single;
  spec.gammas = {0.4};
  spec.methods = {Method::Separate};
  spec.seeds = 2;
  spec.workers = 0;
  spec.experiment = make_config(Method::Separate, 0.4, 0.1, 1);
  spec.experiment.horizon = 20;
  spec.experiment.warm_start = 8;
  spec.experiment.population.group_size = 4;
  spec.eval.rollout_length = 500;
  spec.eval.burn_in = 100;
  for (auto _ : state) {
    const SweepResult r = run_sweep(spec);
    benchmark::DoNotOptimize(r.cells.front().elrar);
  }
}
BENCHMARK(BM_SweepCellsParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
