#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modsim/fluid.hpp"
#include "modsim/sim.hpp"

namespace modsim {

struct PolicySpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct SweepSpec {
  std::string param;  // "lifetime" or "lifetime_ratio"
  std::vector<double> values;
};

/// A named experiment: environment, policies, benchmark windows,
/// replication count and base seed, plus an optional parameter sweep.
struct Scenario {
  std::string name;
  EnvConfig env;
  std::vector<PolicySpec> policies;
  std::vector<Period> windows = {1};
  int replications = 1;
  std::uint64_t base_seed = 1;
  std::optional<SweepSpec> sweep;
  /// figure kind -> output stem, e.g. {"regret_vs_t": "fig3"}.
  std::map<std::string, std::string> figures;

  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Loads a scenario from a file path, or by preset name resolved against
  /// `preset_dir` (falling back to $MODSIM_PRESET_DIR, then the built-in
  /// preset directory).
  static Scenario load(const std::string& file_or_preset,
                       const std::string& preset_dir = "");
};

/// Builds a fresh policy instance per run. prepare() must run before any
/// concurrent make() calls; it solves the per-period fluid relaxation once
/// when a dynamic baseline is present.
class PolicyFactory {
 public:
  explicit PolicyFactory(const EnvConfig& env);
  void prepare(const std::vector<PolicySpec>& specs);
  std::unique_ptr<Policy> make(const PolicySpec& spec) const;

 private:
  const EnvConfig& env_;
  std::optional<FluidSolution> one_fluid_;
};

struct RunMetrics {
  double loss = 0.0;
  LossBreakdown decomposition;
  std::vector<std::int64_t> reviewed_per_type;
  std::uint64_t env_stream_hash = 0;
  /// Cumulative realized loss at the sample grid, each post's loss
  /// attributed to its arrival period.
  std::vector<double> loss_prefix;
  /// Learning policies only (empty otherwise): per type x grid point.
  std::vector<std::vector<double>> h_lo, h_hi, reviewed_prefix;
  /// First period with h_lo > 0 per type; kNever when not reached.
  std::vector<Period> first_certified_positive;
};

struct ReportRow {
  double sweep_value = 0.0;  // 0 when the scenario has no sweep
  std::string policy;
  Period window = 1;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  int replications = 0;
  double mean_loss = 0.0;
  LossBreakdown mean_decomposition;
  std::vector<double> mean_reviewed_per_type;
  std::vector<double> per_seed_regret;  // one entry per replication
  /// Reviewed posts per type for each replication (learning diagnostics).
  std::vector<std::vector<std::int64_t>> per_seed_reviewed;
  /// Latest first-certification period (h_lo > 0) across replications per
  /// type; kNever when any replication never certified.
  std::vector<Period> worst_first_certified;
};

/// Averaged per-period series for one (sweep point, policy), on a shared
/// period grid; used to emit the time-axis figures.
struct ReportSeries {
  double sweep_value = 0.0;
  std::string policy;
  std::vector<Period> grid;
  std::vector<double> regret_mean;  // running average regret, first window
  std::vector<double> regret_se;
  std::vector<std::vector<double>> h_lo_mean, h_hi_mean;  // per type
  std::vector<std::vector<double>> reviewed_mean;         // per type
};

struct RegretReport {
  std::string scenario;
  std::vector<Period> windows;
  std::vector<ReportRow> rows;
  std::vector<ReportSeries> series;
  /// Environment-stream hash per (sweep_value, replication); identical
  /// across policies by construction (common random numbers).
  std::map<std::pair<double, int>, std::uint64_t> env_hashes;
};

struct ExperimentOptions {
  int threads = 0;             // 0 = hardware concurrency
  bool collect_series = true;  // sample trajectories for figures
  int series_points = 200;
};

/// Runs every policy x replication (seed = base_seed + replication, shared
/// across policies), computes realized losses and the fluid benchmark per
/// window, and aggregates mean regret with standard errors.
RegretReport run_experiment(const Scenario& scenario,
                            const ExperimentOptions& opts = {});

/// Applies the sweep parameter to the environment per value and runs each
/// point. An empty value list yields an empty report.
RegretReport sweep_experiment(const Scenario& scenario,
                              const std::string& param,
                              const std::vector<double>& values,
                              const ExperimentOptions& opts = {});

/// Applies a sweep parameter to a copy of the environment.
EnvConfig apply_sweep_value(const EnvConfig& env, const std::string& param,
                            double value);

/// One CSV (columns: x, policy, mean, stderr) and one self-contained SVG
/// line chart per figure declared by the scenario. Returns written paths.
std::vector<std::filesystem::path> emit_figures(
    const RegretReport& report, const Scenario& scenario,
    const std::filesystem::path& out_dir);

/// Writes the flat report table (report.csv) and returns its path.
std::filesystem::path write_report_csv(const RegretReport& report,
                                       const std::filesystem::path& out_dir);

/// Default preset directory compiled into the library.
std::string default_preset_dir();

}  // namespace modsim
