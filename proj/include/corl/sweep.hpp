#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corl/evaluate.hpp"
#include "corl/runner.hpp"

namespace corl {

enum class Setting { Single, S1, S2, S3 };

std::string setting_name(Setting setting);
Setting setting_from_name(const std::string& name);

// One experiment grid: for every (method, gamma, swept value, seed) run the
// online protocol and evaluate the learned policies.
struct SweepSpec {
  Setting setting = Setting::Single;
  std::vector<double> gammas = {0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
  std::vector<Method> methods = {Method::Separate, Method::Cohesion1, Method::Cohesion2};
  int seeds = 8;
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0 = one per hardware thread
  std::string out_dir;  // empty = keep results in memory only
  ExperimentConfig experiment;  // base settings; the sweep overrides per cell
  EvalConfig eval;

  std::string swept_name() const;          // "T", "T0", "mu1" or "none"
  std::vector<double> swept_values() const;
  void validate() const;
};

struct CellResult {
  std::string setting;
  Method method = Method::Separate;
  double gamma = 0.0;
  std::string swept_name;
  double swept_value = 0.0;
  std::uint64_t seed = 0;
  double elrar = 0.0;
  double std_across_users = 0.0;
  double wall_time_s = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<CellResult> cells;
  int failures = 0;
};

// Runs all cells (concurrently up to the worker cap) and, when out_dir is
// set, writes config.json, results.csv, summary.csv, table.txt and, on any
// failure, errors.txt. Cell failures are recorded and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

// The base ExperimentConfig for one cell (swept value applied).
ExperimentConfig cell_config(const SweepSpec& spec, Method method, double gamma,
                             double swept_value, std::uint64_t seed);

// Per-seed rows in the schema
// setting,method,gamma,swept_name,swept_value,seed,elrar,std_across_users,wall_time_s.
std::string results_to_csv(const std::vector<CellResult>& cells);
std::vector<CellResult> results_from_csv(const std::string& text);

// Seed-aggregated long-format rows (one per method/gamma/swept value),
// plot-ready: mean and sample std of ElrAR across seeds.
std::string summary_to_csv(const std::vector<CellResult>& cells);

// Human-readable mean +/- std grid, one block per swept value, gamma rows
// plus a final row averaging over gamma.
std::string render_table(const std::vector<CellResult>& cells);

std::string sweep_spec_to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const std::string& text);

}  // namespace corl
