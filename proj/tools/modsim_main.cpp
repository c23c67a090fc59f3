// Command-line front end: run scenarios, solve fluid benchmarks, replay
// traces, and sweep environment parameters. Exit code 0 on success,
// nonzero on validation or contract faults.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modsim/contextual.hpp"
#include "modsim/harness.hpp"
#include "modsim/learning.hpp"
#include "modsim/policies.hpp"
#include "modsim/trace_io.hpp"

namespace {

std::filesystem::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env_dir = std::getenv("MODSIM_OUT_DIR")) return env_dir;
  return std::filesystem::current_path();
}

std::vector<modsim::Period> parse_window_list(const std::string& csv,
                                              modsim::Period horizon) {
  std::vector<modsim::Period> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "T" || item == "t")
      out.push_back(horizon);
    else
      out.push_back(std::stoll(item));
  }
  return out;
}

void print_report(const modsim::RegretReport& report) {
  for (const auto& row : report.rows) {
    std::cout << "  ";
    if (row.sweep_value != 0.0) std::cout << "value=" << row.sweep_value << " ";
    std::cout << row.policy << " w=" << row.window
              << " regret=" << row.mean_regret << " (se=" << row.stderr_regret
              << ", R=" << row.replications << ")\n";
  }
}

int run_simulate(const std::string& scenario_arg, int reps_override,
                 std::int64_t seed_override, const std::string& out_flag,
                 bool emit_traces, int threads) {
  modsim::Scenario scenario = modsim::Scenario::load(scenario_arg);
  if (reps_override > 0) scenario.replications = reps_override;
  if (seed_override >= 0)
    scenario.base_seed = static_cast<std::uint64_t>(seed_override);

  auto violations = modsim::validate_env(scenario.env);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "invalid env: " << v.where << ": " << v.what << "\n";
    return 2;
  }

  std::filesystem::path out_dir = resolve_out_dir(out_flag);
  modsim::ExperimentOptions opts;
  opts.threads = threads;

  std::cout << "scenario " << scenario.name << ": "
            << scenario.policies.size() << " policies x "
            << scenario.replications << " replications, T="
            << scenario.env.horizon << "\n";
  modsim::RegretReport report = modsim::run_experiment(scenario, opts);
  print_report(report);
  auto report_path = modsim::write_report_csv(report, out_dir);
  auto figures = modsim::emit_figures(report, scenario, out_dir);

  if (scenario.sweep) {
    std::cout << "sweep " << scenario.sweep->param << " over "
              << scenario.sweep->values.size() << " values\n";
    modsim::RegretReport sweep_report = modsim::sweep_experiment(
        scenario, scenario.sweep->param, scenario.sweep->values, opts);
    print_report(sweep_report);
    auto sweep_path = modsim::write_report_csv(
        sweep_report, out_dir / "sweep");
    auto more = modsim::emit_figures(sweep_report, scenario, out_dir);
    figures.insert(figures.end(), more.begin(), more.end());
    std::cout << "sweep report: " << sweep_path.string() << "\n";
  }

  if (emit_traces) {
    modsim::PolicyFactory factory(scenario.env);
    factory.prepare(scenario.policies);
    std::filesystem::create_directories(out_dir / "traces");
    for (const auto& spec : scenario.policies) {
      auto policy = factory.make(spec);
      modsim::Trace trace =
          modsim::run(scenario.env, *policy, scenario.base_seed);
      trace.policy_params = spec.params;
      auto path = out_dir / "traces" / (policy->name() + ".jsonl");
      modsim::write_trace_file(trace, path.string());
      std::cout << "trace: " << path.string() << "\n";
    }
  }

  std::cout << "report: " << report_path.string() << "\n";
  for (const auto& f : figures) std::cout << "figure: " << f.string() << "\n";
  return 0;
}

int run_fluid(const std::string& env_path, const std::string& w_csv,
              const std::string& out_flag) {
  modsim::EnvConfig env = modsim::load_env_file(env_path);
  auto violations = modsim::validate_env(env);
  if (!violations.empty()) {
    for (const auto& v : violations)
      std::cerr << "invalid env: " << v.where << ": " << v.what << "\n";
    return 2;
  }
  std::filesystem::path out_dir = resolve_out_dir(out_flag);
  for (modsim::Period w : parse_window_list(w_csv, env.horizon)) {
    modsim::FluidSolution sol = modsim::solve_w_fluid(env, w);
    std::cout << "w=" << w << " objective=" << sol.objective
              << " per-period=" << sol.objective / double(env.horizon) << "\n";
    nlohmann::json j;
    modsim::to_json(j, sol);
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / ("fluid_w" + std::to_string(w) + ".json"));
    out << j.dump(2) << "\n";
  }
  return 0;
}

int run_replay(const std::string& trace_path) {
  modsim::Trace trace = modsim::read_trace_file(trace_path);
  std::cout << "trace: policy=" << trace.policy_name << " seed=" << trace.seed
            << " T=" << trace.horizon() << " posts=" << trace.posts.size()
            << "\n";
  std::cout << "realized loss: " << modsim::realized_loss(trace) << "\n";
  auto breakdown = modsim::loss_decomposition(trace);
  std::cout << "decomposition: idiosyncrasy=" << breakdown.idiosyncrasy
            << " delay=" << breakdown.delay
            << " classification=" << breakdown.classification << "\n";

  int failures = 0;
  auto sides = modsim::little_law_sides(trace);
  if (sides.delay_sum != sides.queue_sum) {
    std::cerr << "queue accounting identity violated: " << sides.delay_sum
              << " != " << sides.queue_sum << "\n";
    ++failures;
  }
  for (const auto& problem : modsim::conservation_violations(trace)) {
    std::cerr << "conservation: " << problem << "\n";
    ++failures;
  }

  // Re-run the recorded policy under the recorded seed and compare.
  try {
    modsim::PolicyFactory factory(trace.env);
    modsim::PolicySpec spec{trace.policy_name, trace.policy_params};
    if (spec.name.rfind("static_", 0) == 0 && spec.name != "static_k") {
      int type = std::stoi(spec.name.substr(7)) - 1;
      spec.name = "static_k";
      spec.params["type"] = type;
    }
    factory.prepare({spec});
    auto policy = factory.make(spec);
    modsim::Trace rerun = modsim::run(trace.env, *policy, trace.seed);
    bool same = rerun.posts.size() == trace.posts.size() &&
                rerun.env_stream_hash == trace.env_stream_hash &&
                rerun.final_queued == trace.final_queued;
    for (std::size_t i = 0; same && i < trace.posts.size(); ++i) {
      const auto& a = trace.posts[i];
      const auto& b = rerun.posts[i];
      same = a.type_id == b.type_id && a.arrival_period == b.arrival_period &&
             a.true_cost == b.true_cost && a.initial_class == b.initial_class &&
             a.admitted == b.admitted && a.review_period == b.review_period;
    }
    if (same) {
      std::cout << "replay: reproduced bit-identically\n";
    } else {
      std::cerr << "replay: re-run diverges from the recorded trace\n";
      ++failures;
    }
  } catch (const std::exception& e) {
    std::cout << "replay: policy not reconstructable (" << e.what()
              << "); invariant checks only\n";
  }
  return failures == 0 ? 0 : 1;
}

int run_sweep(const std::string& scenario_arg, const std::string& param,
              const std::string& values_csv, const std::string& out_flag,
              int reps_override, int threads) {
  modsim::Scenario scenario = modsim::Scenario::load(scenario_arg);
  if (reps_override > 0) scenario.replications = reps_override;
  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));

  modsim::ExperimentOptions opts;
  opts.threads = threads;
  modsim::RegretReport report =
      modsim::sweep_experiment(scenario, param, values, opts);
  print_report(report);
  std::filesystem::path out_dir = resolve_out_dir(out_flag);
  auto report_path = modsim::write_report_csv(report, out_dir);
  auto figures = modsim::emit_figures(report, scenario, out_dir);
  std::cout << "report: " << report_path.string() << "\n";
  for (const auto& f : figures) std::cout << "figure: " << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moderation pipeline simulator and policy benchmark harness"};
  app.require_subcommand(1);

  std::string scenario_arg, out_flag, env_path, w_csv = "1", trace_path;
  std::string param, values_csv;
  int reps = 0, threads = 0;
  std::int64_t seed = -1;
  bool emit_traces = false;

  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario");
  simulate->add_option("--scenario", scenario_arg, "scenario file or preset")
      ->required();
  simulate->add_option("--reps", reps, "override replication count");
  simulate->add_option("--seed", seed, "override base seed");
  simulate->add_option("--out", out_flag, "output directory");
  simulate->add_option("--threads", threads, "worker threads (0 = auto)");
  simulate->add_flag("--emit-traces", emit_traces,
                     "write one trace per policy for the base seed");

  CLI::App* fluid = app.add_subcommand("fluid", "solve the fluid benchmark");
  fluid->add_option("--env", env_path, "environment JSON file")->required();
  fluid->add_option("--w", w_csv, "comma-separated window sizes (T = horizon)");
  fluid->add_option("--out", out_flag, "output directory");

  CLI::App* replay = app.add_subcommand("replay", "verify a recorded trace");
  replay->add_option("--trace", trace_path, "trace JSONL file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "sweep an env parameter");
  sweep->add_option("--scenario", scenario_arg, "scenario file or preset")
      ->required();
  sweep->add_option("--param", param, "lifetime | lifetime_ratio")->required();
  sweep->add_option("--values", values_csv, "comma-separated values")
      ->required();
  sweep->add_option("--reps", reps, "override replication count");
  sweep->add_option("--out", out_flag, "output directory");
  sweep->add_option("--threads", threads, "worker threads (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return run_simulate(scenario_arg, reps, seed, out_flag, emit_traces,
                          threads);
    if (fluid->parsed()) return run_fluid(env_path, w_csv, out_flag);
    if (replay->parsed()) return run_replay(trace_path);
    if (sweep->parsed())
      return run_sweep(scenario_arg, param, values_csv, out_flag, reps,
                       threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
