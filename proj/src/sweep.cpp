#include "corl/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "corl/errors.hpp"
#include "corl/io.hpp"

namespace corl {

namespace {

double sample_std(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

struct GroupKey {
  double swept_value;
  double gamma;
  bool operator<(const GroupKey& other) const {
    if (swept_value != other.swept_value) return swept_value < other.swept_value;
    return gamma < other.gamma;
  }
};

}  // namespace

std::string setting_name(Setting setting) {
  switch (setting) {
    case Setting::Single: return "single";
    case Setting::S1: return "s1";
    case Setting::S2: return "s2";
    case Setting::S3: return "s3";
  }
  return "unknown";
}

Setting setting_from_name(const std::string& name) {
  if (name == "single") return Setting::Single;
  if (name == "s1") return Setting::S1;
  if (name == "s2") return Setting::S2;
  if (name == "s3") return Setting::S3;
  throw ConfigError("unknown setting: " + name);
}

std::string SweepSpec::swept_name() const {
  switch (setting) {
    case Setting::Single: return "none";
    case Setting::S1: return "T";
    case Setting::S2: return "T0";
    case Setting::S3: return "mu1";
  }
  return "none";
}

std::vector<double> SweepSpec::swept_values() const {
  switch (setting) {
    case Setting::Single: return {0.0};
    case Setting::S1: return {50, 80, 110, 150};
    case Setting::S2: return {5, 10, 15, 20};
    case Setting::S3: return {0.001, 0.01, 0.1, 1.0, 10.0};
  }
  return {0.0};
}

void SweepSpec::validate() const {
  if (gammas.empty()) throw ConfigError("SweepSpec: gamma list must be nonempty");
  if (methods.empty()) throw ConfigError("SweepSpec: method list must be nonempty");
  if (seeds < 1) throw ConfigError("SweepSpec: seeds must be >= 1");
  eval.validate();
}

ExperimentConfig cell_config(const SweepSpec& spec, Method method, double gamma,
                             double swept_value, std::uint64_t seed) {
  ExperimentConfig config = spec.experiment;
  config.method = method;
  config.gamma = gamma;
  config.seed = seed;
  switch (spec.setting) {
    case Setting::Single:
      break;
    case Setting::S1:
      config.horizon = static_cast<int>(swept_value);
      break;
    case Setting::S2:
      config.warm_start = static_cast<int>(swept_value);
      break;
    case Setting::S3: {
      // The companion weights track mu1, and the ridge rule is re-applied.
      config.mu1 = swept_value;
      config.mu2 = 0.01 * swept_value;
      config.mu3 = swept_value;
      const double zeta = std::min({config.mu1, config.mu2, config.mu3}) <= 1e-4 ? 0.1 : 0.0;
      config.zeta1 = zeta;
      config.zeta2 = zeta;
      config.zeta3 = zeta;
      break;
    }
  }
  return config;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();

  struct CellPlan {
    Method method;
    double gamma;
    double swept_value;
    std::uint64_t seed;
  };
  std::vector<CellPlan> plans;
  for (Method method : spec.methods)
    for (double gamma : spec.gammas)
      for (double swept : spec.swept_values())
        for (int s = 0; s < spec.seeds; ++s)
          plans.push_back({method, gamma, swept, spec.base_seed + static_cast<std::uint64_t>(s)});

  SweepResult result;
  result.cells.resize(plans.size());

  int workers = spec.workers;
#ifdef _OPENMP
  if (workers <= 0) workers = omp_get_max_threads();
#else
  workers = 1;
#endif

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int idx = 0; idx < static_cast<int>(plans.size()); ++idx) {
    const CellPlan& plan = plans[static_cast<std::size_t>(idx)];
    CellResult cell;
    cell.setting = setting_name(spec.setting);
    cell.method = plan.method;
    cell.gamma = plan.gamma;
    cell.swept_name = spec.swept_name();
    cell.swept_value = plan.swept_value;
    cell.seed = plan.seed;
    const auto started = std::chrono::steady_clock::now();
    try {
      const ExperimentConfig config =
          cell_config(spec, plan.method, plan.gamma, plan.swept_value, plan.seed);
      const RunResult run = run_online(config);
      const std::vector<UserModel> users = generate_population(config.population, config.seed);
      EvalConfig eval = spec.eval;
      eval.seed = config.seed;
      const ElrarResult score =
          elrar(users, run.theta, config.population.init_state_cov, eval, /*parallel=*/false);
      cell.elrar = score.mean;
      cell.std_across_users = sample_std(
          std::vector<double>(score.per_user.data(), score.per_user.data() + score.per_user.size()),
          score.mean);
      cell.ok = true;
    } catch (const std::exception& err) {
      cell.ok = false;
      cell.error = err.what();
    }
    cell.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.cells[static_cast<std::size_t>(idx)] = std::move(cell);
  }

  for (const CellResult& cell : result.cells)
    if (!cell.ok) ++result.failures;

  if (!spec.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    io::write_file((fs::path(spec.out_dir) / "config.json").string(), sweep_spec_to_json(spec));
    io::write_file((fs::path(spec.out_dir) / "results.csv").string(),
                   results_to_csv(result.cells));
    io::write_file((fs::path(spec.out_dir) / "summary.csv").string(),
                   summary_to_csv(result.cells));
    io::write_file((fs::path(spec.out_dir) / "table.txt").string(), render_table(result.cells));
    if (result.failures > 0) {
      std::ostringstream errors;
      for (const CellResult& cell : result.cells)
        if (!cell.ok)
          errors << cell.setting << ',' << method_name(cell.method) << ",gamma="
                 << io::format_double(cell.gamma) << ',' << cell.swept_name << '='
                 << io::format_double(cell.swept_value) << ",seed=" << cell.seed << ": "
                 << cell.error << '\n';
      io::write_file((fs::path(spec.out_dir) / "errors.txt").string(), errors.str());
    }
  }
  return result;
}

std::string results_to_csv(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << "setting,method,gamma,swept_name,swept_value,seed,elrar,std_across_users,wall_time_s\n";
  for (const CellResult& cell : cells) {
    if (!cell.ok) continue;
    out << cell.setting << ',' << method_name(cell.method) << ','
        << io::format_double(cell.gamma) << ',' << cell.swept_name << ','
        << io::format_double(cell.swept_value) << ',' << cell.seed << ','
        << io::format_double(cell.elrar) << ',' << io::format_double(cell.std_across_users)
        << ',' << io::format_double(cell.wall_time_s) << '\n';
  }
  return out.str();
}

std::vector<CellResult> results_from_csv(const std::string& text) {
  std::vector<CellResult> cells;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;
    }
    std::istringstream fields(line);
    std::string cell_text;
    std::vector<std::string> parts;
    while (std::getline(fields, cell_text, ',')) parts.push_back(cell_text);
    if (parts.size() != 9) throw ConfigError("results_from_csv: malformed row: " + line);
    CellResult cell;
    cell.setting = parts[0];
    cell.method = method_from_name(parts[1]);
    cell.gamma = std::stod(parts[2]);
    cell.swept_name = parts[3];
    cell.swept_value = std::stod(parts[4]);
    cell.seed = std::stoull(parts[5]);
    cell.elrar = std::stod(parts[6]);
    cell.std_across_users = std::stod(parts[7]);
    cell.wall_time_s = std::stod(parts[8]);
    cell.ok = true;
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::string summary_to_csv(const std::vector<CellResult>& cells) {
  std::map<GroupKey, std::map<Method, std::vector<double>>> groups;
  std::string setting = "single";
  std::string swept_name = "none";
  for (const CellResult& cell : cells) {
    if (!cell.ok) continue;
    groups[{cell.swept_value, cell.gamma}][cell.method].push_back(cell.elrar);
    setting = cell.setting;
    swept_name = cell.swept_name;
  }
  std::ostringstream out;
  out << "setting,method,gamma,swept_name,swept_value,mean_elrar,std_elrar,seeds\n";
  for (const auto& [key, by_method] : groups) {
    for (const auto& [method, values] : by_method) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      out << setting << ',' << method_name(method) << ',' << io::format_double(key.gamma)
          << ',' << swept_name << ',' << io::format_double(key.swept_value) << ','
          << io::format_double(mean) << ',' << io::format_double(sample_std(values, mean))
          << ',' << values.size() << '\n';
    }
  }
  return out.str();
}

std::string render_table(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  if (cells.empty() || std::none_of(cells.begin(), cells.end(),
                                    [](const CellResult& c) { return c.ok; })) {
    out << "gamma\n";
    return out.str();
  }

  // Preserve first-seen order of methods and swept values.
  std::vector<Method> methods;
  std::vector<double> swept;
  std::vector<double> gammas;
  std::string swept_name = "none";
  for (const CellResult& cell : cells) {
    if (!cell.ok) continue;
    if (std::find(methods.begin(), methods.end(), cell.method) == methods.end())
      methods.push_back(cell.method);
    if (std::find(swept.begin(), swept.end(), cell.swept_value) == swept.end())
      swept.push_back(cell.swept_value);
    if (std::find(gammas.begin(), gammas.end(), cell.gamma) == gammas.end())
      gammas.push_back(cell.gamma);
    swept_name = cell.swept_name;
  }
  std::sort(swept.begin(), swept.end());
  std::sort(gammas.begin(), gammas.end());

  constexpr int kColWidth = 18;
  for (double value : swept) {
    if (swept_name != "none")
      out << "=== " << swept_name << " = " << io::format_double(value) << " ===\n";
    out << "gamma";
    out << std::string(kColWidth - 5, ' ');
    for (Method method : methods) {
      std::string name = method_name(method);
      name.resize(static_cast<std::size_t>(kColWidth), ' ');
      out << name;
    }
    out << '\n';

    std::vector<double> column_sums(methods.size(), 0.0);
    std::vector<int> column_counts(methods.size(), 0);
    for (double gamma : gammas) {
      std::string row = format_fixed(gamma, 2);
      row.resize(static_cast<std::size_t>(kColWidth), ' ');
      out << row;
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        std::vector<double> values;
        for (const CellResult& cell : cells)
          if (cell.ok && cell.method == methods[mi] && cell.gamma == gamma &&
              cell.swept_value == value)
            values.push_back(cell.elrar);
        std::string text = "-";
        if (!values.empty()) {
          double mean = 0.0;
          for (double v : values) mean += v;
          mean /= static_cast<double>(values.size());
          column_sums[mi] += mean;
          ++column_counts[mi];
          text = format_fixed(mean, 1) + " +- " + format_fixed(sample_std(values, mean), 1);
        }
        text.resize(static_cast<std::size_t>(kColWidth), ' ');
        out << text;
      }
      out << '\n';
    }
    std::string avg = "Avg.";
    avg.resize(static_cast<std::size_t>(kColWidth), ' ');
    out << avg;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      std::string text = "-";
      if (column_counts[mi] > 0)
        text = format_fixed(column_sums[mi] / column_counts[mi], 1);
      text.resize(static_cast<std::size_t>(kColWidth), ' ');
      out << text;
    }
    out << "\n\n";
  }
  return out.str();
}

std::string sweep_spec_to_json(const SweepSpec& spec) {
  nlohmann::json j;
  j["setting"] = setting_name(spec.setting);
  j["gammas"] = spec.gammas;
  nlohmann::json methods = nlohmann::json::array();
  for (Method method : spec.methods) methods.push_back(method_name(method));
  j["methods"] = methods;
  j["seeds"] = spec.seeds;
  j["base_seed"] = spec.base_seed;
  j["workers"] = spec.workers;
  j["out_dir"] = spec.out_dir;
  j["experiment"] = nlohmann::json::parse(io::experiment_config_to_json(spec.experiment));
  j["eval"] = nlohmann::json::parse(io::eval_config_to_json(spec.eval));
  return j.dump(2);
}

SweepSpec sweep_spec_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  SweepSpec spec;
  spec.setting = setting_from_name(j.at("setting").get<std::string>());
  spec.gammas = j.at("gammas").get<std::vector<double>>();
  spec.methods.clear();
  for (const auto& name : j.at("methods"))
    spec.methods.push_back(method_from_name(name.get<std::string>()));
  spec.seeds = j.at("seeds").get<int>();
  spec.base_seed = j.at("base_seed").get<std::uint64_t>();
  spec.workers = j.at("workers").get<int>();
  spec.out_dir = j.at("out_dir").get<std::string>();
  spec.experiment = io::experiment_config_from_json(j.at("experiment").dump());
  spec.eval = io::eval_config_from_json(j.at("eval").dump());
  return spec;
}

}  // namespace corl
