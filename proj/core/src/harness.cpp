#include "modsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "modsim/contextual.hpp"
#include "modsim/learning.hpp"
#include "modsim/policies.hpp"

#ifndef MODSIM_PRESET_DIR
#define MODSIM_PRESET_DIR ""
#endif

namespace modsim {

namespace {

std::vector<Period> sample_grid(Period horizon, int points) {
  std::vector<Period> grid;
  if (horizon <= 0) return grid;
  points = std::max(1, points);
  for (int i = 1; i <= points; ++i) {
    Period t = static_cast<Period>(
        std::llround(static_cast<double>(i) * static_cast<double>(horizon) /
                     static_cast<double>(points)));
    t = std::clamp<Period>(t, 1, horizon);
    if (grid.empty() || grid.back() != t) grid.push_back(t);
  }
  return grid;
}

LearningParams learning_params_from(const nlohmann::json& params) {
  LearningParams p;
  if (params.contains("beta")) p.beta = params.at("beta").get<double>();
  if (params.contains("gamma")) p.gamma = params.at("gamma").get<double>();
  if (params.contains("sigma_max"))
    p.sigma_max = params.at("sigma_max").get<double>();
  if (params.contains("r_max")) p.r_max = params.at("r_max").get<double>();
  return p;
}

std::vector<std::vector<double>> load_feature_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open features file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    std::vector<double> row;
    double x;
    while (ss >> x) row.push_back(x);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

ColbacidParams colbacid_params_from(const nlohmann::json& params) {
  ColbacidParams p;
  if (params.contains("beta")) p.beta = params.at("beta").get<double>();
  if (params.contains("gamma")) p.gamma = params.at("gamma").get<double>();
  if (params.contains("delta")) p.delta = params.at("delta").get<double>();
  if (params.contains("kappa")) p.kappa = params.at("kappa").get<double>();
  if (params.contains("zeta")) p.zeta = params.at("zeta").get<double>();
  if (params.contains("groups"))
    p.groups = params.at("groups").get<std::vector<int>>();
  if (params.contains("sigma_max"))
    p.sigma_max = params.at("sigma_max").get<double>();
  if (params.contains("r_max")) p.r_max = params.at("r_max").get<double>();
  if (params.contains("features"))
    p.features = params.at("features").get<std::vector<std::vector<double>>>();
  else if (params.contains("features_file"))
    p.features = load_feature_file(params.at("features_file").get<std::string>());
  return p;
}

enum class BoundsReplay { none, finite, contextual };

BoundsReplay replay_mode(const std::string& policy_name) {
  if (policy_name == "bacid_ucb" || policy_name == "olbacid")
    return BoundsReplay::finite;
  if (policy_name == "colbacid") return BoundsReplay::contextual;
  return BoundsReplay::none;
}

/// Recomputes per-type confidence-bound trajectories by replaying the
/// trace's review completions through fresh statistics; mirrors what the
/// policy saw without touching policy internals.
void replay_bounds(const Trace& trace, const PolicySpec& spec,
                   const std::vector<Period>& grid, RunMetrics& metrics) {
  const EnvConfig& env = trace.env;
  const int num_types = env.num_types();
  const BoundsReplay mode = replay_mode(spec.name);
  if (mode == BoundsReplay::none || grid.empty()) return;

  metrics.h_lo.assign(num_types, std::vector<double>(grid.size(), 0.0));
  metrics.h_hi.assign(num_types, std::vector<double>(grid.size(), 0.0));
  metrics.reviewed_prefix.assign(num_types,
                                 std::vector<double>(grid.size(), 0.0));
  metrics.first_certified_positive.assign(num_types, kNever);

  LearningParams lp = learning_params_from(spec.params);
  double sigma_max = lp.sigma_max.value_or(env.sigma_max);
  double r_max = lp.r_max.value_or(env.r_max);

  std::vector<TypeStats> stats(num_types);
  std::optional<ColbacidParams> cp;
  std::optional<RidgeState> ridge;
  std::vector<Eigen::VectorXd> features;
  double kappa = 1.0, delta = 0.5;
  if (mode == BoundsReplay::contextual) {
    cp = colbacid_params_from(spec.params);
    sigma_max = cp->sigma_max.value_or(env.sigma_max);
    r_max = cp->r_max.value_or(env.r_max);
    kappa = cp->kappa.value_or(std::max(1.0, env.U * env.U));
    GroupPartition part =
        cp->groups ? GroupPartition{}  // size only matters for gamma default
                   : make_partition(env.types, cp->zeta.value_or(1.0),
                                    env.max_capacity());
    int groups = cp->groups ? 1 + *std::max_element(cp->groups->begin(),
                                                    cp->groups->end())
                            : part.num_groups();
    double gamma = cp->gamma.value_or(cp->beta.value_or(
        1.0 / std::sqrt(static_cast<double>(groups) *
                        static_cast<double>(env.max_lifetime()))));
    delta = cp->delta.value_or(std::min(
        gamma, 0.5 / std::max<double>(1.0, static_cast<double>(env.horizon))));
    if (cp->features) {
      for (const auto& row : *cp->features)
        features.push_back(Eigen::Map<const Eigen::VectorXd>(
            row.data(), static_cast<Eigen::Index>(row.size())));
    } else {
      for (int k = 0; k < num_types; ++k) {
        std::vector<double> row = env.feature_of(k);
        features.push_back(Eigen::Map<const Eigen::VectorXd>(
            row.data(), static_cast<Eigen::Index>(row.size())));
      }
    }
    ridge.emplace(static_cast<int>(features.front().size()), kappa);
  }

  auto bounds_at = [&](int k, Period t) -> ConfBounds {
    if (mode == BoundsReplay::finite)
      return conf_bounds(stats[k], t, sigma_max, r_max);
    double radius =
        b_delta(ridge->data_count(), ridge->dim(), env.U, kappa, sigma_max, delta);
    return contextual_conf(*ridge, features[k], radius, r_max);
  };

  std::size_t next_grid = 0;
  for (Period t = 1; t <= trace.horizon(); ++t) {
    for (int k = 0; k < num_types; ++k) {
      ConfBounds b = bounds_at(k, t);
      if (metrics.first_certified_positive[k] == kNever && b.h_lo > 0.0)
        metrics.first_certified_positive[k] = t;
      if (next_grid < grid.size() && grid[next_grid] == t) {
        metrics.h_lo[k][next_grid] = b.h_lo;
        metrics.h_hi[k][next_grid] = b.h_hi;
        metrics.reviewed_prefix[k][next_grid] =
            static_cast<double>(stats[k].n);
      }
    }
    if (next_grid < grid.size() && grid[next_grid] == t) ++next_grid;
    const PeriodRecord& rec = trace.periods[static_cast<std::size_t>(t - 1)];
    if (rec.reviewed >= 0) {
      const Post& post = trace.posts[static_cast<std::size_t>(rec.reviewed)];
      stats[post.type_id].add(post.true_cost);
      if (mode == BoundsReplay::contextual)
        ridge->update(features[post.type_id], post.true_cost);
    }
  }
}

RunMetrics extract_metrics(const Trace& trace, const PolicySpec& spec,
                           const std::vector<Period>& grid,
                           bool collect_series) {
  RunMetrics m;
  m.loss = realized_loss(trace);
  m.decomposition = loss_decomposition(trace);
  m.env_stream_hash = trace.env_stream_hash;
  m.reviewed_per_type.assign(trace.env.types.size(), 0);
  for (const Post& post : trace.posts)
    if (post.reviewed()) m.reviewed_per_type[post.type_id] += 1;

  if (!collect_series || grid.empty()) return m;

  // Loss attributed to arrival periods, cumulated over the grid.
  std::vector<double> by_period(static_cast<std::size_t>(trace.horizon()) + 1,
                                0.0);
  const Period horizon = trace.horizon();
  for (const Post& post : trace.posts) {
    bool clairvoyant_keeps = post.true_cost <= 0.0;
    if ((post.initial_class == Classification::keep) == clairvoyant_keeps)
      continue;
    Period lifetime = trace.env.types[post.type_id].lifetime;
    Period diverged = post.admitted == AdmitTarget::none
                          ? lifetime
                          : std::min(post.delay(horizon), lifetime);
    by_period[static_cast<std::size_t>(post.arrival_period)] +=
        std::abs(post.true_cost) * static_cast<double>(diverged);
  }
  double acc = 0.0;
  std::size_t next_grid = 0;
  for (Period t = 1; t <= horizon && next_grid < grid.size(); ++t) {
    acc += by_period[static_cast<std::size_t>(t)];
    if (grid[next_grid] == t) {
      m.loss_prefix.push_back(acc);
      ++next_grid;
    }
  }
  replay_bounds(trace, spec, grid, m);
  return m;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace

PolicyFactory::PolicyFactory(const EnvConfig& env) : env_(env) {}

void PolicyFactory::prepare(const std::vector<PolicySpec>& specs) {
  for (const auto& spec : specs)
    if (spec.name == "dynamic_fluid" && !one_fluid_)
      one_fluid_ = solve_w_fluid(env_, 1);
}

std::unique_ptr<Policy> PolicyFactory::make(const PolicySpec& spec) const {
  const nlohmann::json& p = spec.params;
  if (spec.name == "ai_only") return std::make_unique<AiOnlyPolicy>(env_);
  if (spec.name == "human_only") return std::make_unique<HumanOnlyPolicy>(env_);
  if (spec.name == "bacid") {
    BacidParams bp;
    if (p.contains("beta")) bp.beta = p.at("beta").get<double>();
    if (p.contains("window")) bp.window = p.at("window").get<Period>();
    return std::make_unique<BacidPolicy>(env_, bp);
  }
  if (spec.name == "static_k") {
    int type = p.at("type").get<int>();
    return std::make_unique<StaticTypePolicy>(env_, type);
  }
  if (spec.name == "dynamic_fluid") {
    if (!one_fluid_)
      throw std::logic_error("PolicyFactory::prepare was not called");
    return std::make_unique<DynamicFluidPolicy>(env_, *one_fluid_);
  }
  if (spec.name == "bacid_ucb") {
    std::vector<int> known;
    if (p.contains("known_types"))
      known = p.at("known_types").get<std::vector<int>>();
    return std::make_unique<BacidUcbPolicy>(env_, learning_params_from(p),
                                            std::move(known));
  }
  if (spec.name == "olbacid")
    return std::make_unique<OlbacidPolicy>(env_, learning_params_from(p));
  if (spec.name == "colbacid")
    return std::make_unique<ColbacidPolicy>(env_, colbacid_params_from(p));
  throw std::invalid_argument("unknown policy: " + spec.name);
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  s.name = j.at("name").get<std::string>();
  s.env = j.at("env").get<EnvConfig>();
  for (const auto& jp : j.at("policies")) {
    PolicySpec spec;
    spec.name = jp.at("name").get<std::string>();
    spec.params = jp.value("params", nlohmann::json::object());
    s.policies.push_back(std::move(spec));
  }
  if (j.contains("windows")) s.windows = j.at("windows").get<std::vector<Period>>();
  s.replications = j.value("replications", 1);
  s.base_seed = j.value("base_seed", std::uint64_t{1});
  if (j.contains("sweep")) {
    SweepSpec sw;
    sw.param = j.at("sweep").at("param").get<std::string>();
    sw.values = j.at("sweep").at("values").get<std::vector<double>>();
    s.sweep = std::move(sw);
  }
  if (j.contains("figures"))
    s.figures = j.at("figures").get<std::map<std::string, std::string>>();
  return s;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json jp = nlohmann::json::array();
  for (const auto& spec : policies)
    jp.push_back({{"name", spec.name}, {"params", spec.params}});
  nlohmann::json j{{"name", name},          {"env", env},
                   {"policies", jp},        {"windows", windows},
                   {"replications", replications}, {"base_seed", base_seed}};
  if (sweep)
    j["sweep"] = {{"param", sweep->param}, {"values", sweep->values}};
  if (!figures.empty()) j["figures"] = figures;
  return j;
}

std::string default_preset_dir() {
  if (const char* env_dir = std::getenv("MODSIM_PRESET_DIR")) return env_dir;
  return MODSIM_PRESET_DIR;
}

Scenario Scenario::load(const std::string& file_or_preset,
                        const std::string& preset_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> candidates;
  candidates.emplace_back(file_or_preset);
  std::string dir = preset_dir.empty() ? default_preset_dir() : preset_dir;
  if (!dir.empty()) {
    candidates.emplace_back(fs::path(dir) / (file_or_preset + ".json"));
    candidates.emplace_back(fs::path(dir) / file_or_preset);
  }
  for (const auto& path : candidates) {
    std::ifstream in(path);
    if (!in) continue;
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }
  throw std::runtime_error("scenario not found: " + file_or_preset);
}

EnvConfig apply_sweep_value(const EnvConfig& env, const std::string& param,
                            double value) {
  EnvConfig out = env;
  if (param == "lifetime") {
    for (auto& tp : out.types)
      tp.lifetime = std::max<Period>(1, std::llround(value));
  } else if (param == "lifetime_ratio") {
    if (out.types.size() < 2)
      throw std::invalid_argument("lifetime_ratio needs at least two types");
    out.types[1].lifetime = std::max<Period>(
        1, std::llround(value * static_cast<double>(out.types[0].lifetime)));
  } else {
    throw std::invalid_argument("unknown sweep parameter: " + param);
  }
  return out;
}

namespace {

struct RunJob {
  std::size_t policy_idx;
  int replication;
};

RegretReport run_point(const Scenario& scenario, const EnvConfig& env,
                       double sweep_value, const ExperimentOptions& opts) {
  if (scenario.policies.empty())
    throw std::invalid_argument("scenario has no policies");
  auto violations = validate_env(env);
  if (!violations.empty())
    throw std::invalid_argument("invalid environment: " +
                                violations.front().where + ": " +
                                violations.front().what);

  PolicyFactory factory(env);
  factory.prepare(scenario.policies);

  std::vector<FluidSolution> fluids;
  for (Period w : scenario.windows) fluids.push_back(solve_w_fluid(env, w));

  const std::vector<Period> grid =
      opts.collect_series ? sample_grid(env.horizon, opts.series_points)
                          : std::vector<Period>{};

  const int reps = scenario.replications;
  std::vector<std::vector<RunMetrics>> metrics(
      scenario.policies.size(), std::vector<RunMetrics>(static_cast<std::size_t>(reps)));

  std::vector<RunJob> jobs;
  for (std::size_t p = 0; p < scenario.policies.size(); ++p)
    for (int r = 0; r < reps; ++r) jobs.push_back({p, r});

  int threads = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));

  std::atomic<std::size_t> next_job{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      for (;;) {
        std::size_t i = next_job.fetch_add(1);
        if (i >= jobs.size()) return;
        const RunJob& job = jobs[i];
        const PolicySpec& spec = scenario.policies[job.policy_idx];
        auto policy = factory.make(spec);
        Trace trace =
            run(env, *policy, scenario.base_seed + static_cast<std::uint64_t>(
                                                       job.replication));
        metrics[job.policy_idx][static_cast<std::size_t>(job.replication)] =
            extract_metrics(trace, spec, grid, opts.collect_series);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      next_job.store(jobs.size());  // drain remaining work
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  RegretReport report;
  report.scenario = scenario.name;
  report.windows = scenario.windows;

  for (std::size_t p = 0; p < scenario.policies.size(); ++p) {
    const PolicySpec& spec = scenario.policies[p];
    std::string policy_label = spec.name == "static_k"
                                   ? "static_" + std::to_string(
                                         spec.params.at("type").get<int>() + 1)
                                   : spec.name;
    for (std::size_t wi = 0; wi < scenario.windows.size(); ++wi) {
      ReportRow row;
      row.sweep_value = sweep_value;
      row.policy = policy_label;
      row.window = scenario.windows[wi];
      row.replications = reps;
      std::vector<double> regrets, losses;
      for (int r = 0; r < reps; ++r) {
        const RunMetrics& m = metrics[p][static_cast<std::size_t>(r)];
        losses.push_back(m.loss);
        regrets.push_back(average_regret(m.loss, fluids[wi], env.horizon));
      }
      row.per_seed_regret = regrets;
      row.mean_regret = mean_of(regrets);
      row.stderr_regret = stderr_of(regrets);
      row.mean_loss = mean_of(losses);
      const int num_types = env.num_types();
      row.mean_reviewed_per_type.assign(num_types, 0.0);
      for (int r = 0; r < reps; ++r) {
        const RunMetrics& m = metrics[p][static_cast<std::size_t>(r)];
        row.mean_decomposition.idiosyncrasy +=
            m.decomposition.idiosyncrasy / static_cast<double>(reps);
        row.mean_decomposition.delay +=
            m.decomposition.delay / static_cast<double>(reps);
        row.mean_decomposition.classification +=
            m.decomposition.classification / static_cast<double>(reps);
        for (int k = 0; k < num_types; ++k)
          row.mean_reviewed_per_type[k] +=
              static_cast<double>(m.reviewed_per_type[k]) /
              static_cast<double>(reps);
      }
      for (int r = 0; r < reps; ++r)
        row.per_seed_reviewed.push_back(
            metrics[p][static_cast<std::size_t>(r)].reviewed_per_type);
      if (!metrics[p].empty() &&
          !metrics[p][0].first_certified_positive.empty()) {
        row.worst_first_certified.assign(num_types, kNever);
        for (int k = 0; k < num_types; ++k) {
          Period worst = 0;
          for (int r = 0; r < reps; ++r) {
            Period c = metrics[p][static_cast<std::size_t>(r)]
                           .first_certified_positive[k];
            if (c == kNever) {
              worst = kNever;
              break;
            }
            worst = std::max(worst, c);
          }
          row.worst_first_certified[k] = worst;
        }
      }
      report.rows.push_back(std::move(row));
    }

    if (opts.collect_series && !grid.empty()) {
      ReportSeries series;
      series.sweep_value = sweep_value;
      series.policy = policy_label;
      series.grid = grid;
      series.regret_mean.assign(grid.size(), 0.0);
      series.regret_se.assign(grid.size(), 0.0);
      const FluidSolution& fluid = fluids[0];
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        std::vector<double> vals;
        for (int r = 0; r < reps; ++r) {
          const RunMetrics& m = metrics[p][static_cast<std::size_t>(r)];
          if (m.loss_prefix.size() != grid.size()) continue;
          double t = static_cast<double>(grid[gi]);
          vals.push_back((m.loss_prefix[gi] -
                          fluid.objective_prefix(grid[gi])) / t);
        }
        series.regret_mean[gi] = mean_of(vals);
        series.regret_se[gi] = stderr_of(vals);
      }
      if (!metrics[p].empty() && !metrics[p][0].h_lo.empty()) {
        const int num_types = env.num_types();
        series.h_lo_mean.assign(num_types, std::vector<double>(grid.size(), 0.0));
        series.h_hi_mean.assign(num_types, std::vector<double>(grid.size(), 0.0));
        series.reviewed_mean.assign(num_types,
                                    std::vector<double>(grid.size(), 0.0));
        for (int r = 0; r < reps; ++r) {
          const RunMetrics& m = metrics[p][static_cast<std::size_t>(r)];
          for (int k = 0; k < num_types; ++k)
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
              series.h_lo_mean[k][gi] += m.h_lo[k][gi] / reps;
              series.h_hi_mean[k][gi] += m.h_hi[k][gi] / reps;
              series.reviewed_mean[k][gi] += m.reviewed_prefix[k][gi] / reps;
            }
        }
      }
      report.series.push_back(std::move(series));
    }
  }

  // Common-random-numbers check: every policy consumed identical
  // environment draws per replication.
  for (int r = 0; r < reps; ++r) {
    std::uint64_t h = metrics[0][static_cast<std::size_t>(r)].env_stream_hash;
    for (std::size_t p = 1; p < scenario.policies.size(); ++p)
      if (metrics[p][static_cast<std::size_t>(r)].env_stream_hash != h)
        throw std::logic_error("environment streams diverged across policies");
    report.env_hashes[{sweep_value, r}] = h;
  }
  return report;
}

}  // namespace

RegretReport run_experiment(const Scenario& scenario,
                            const ExperimentOptions& opts) {
  return run_point(scenario, scenario.env, 0.0, opts);
}

RegretReport sweep_experiment(const Scenario& scenario,
                              const std::string& param,
                              const std::vector<double>& values,
                              const ExperimentOptions& opts) {
  RegretReport report;
  report.scenario = scenario.name;
  report.windows = scenario.windows;
  for (double value : values) {
    EnvConfig env = apply_sweep_value(scenario.env, param, value);
    RegretReport point = run_point(scenario, env, value, opts);
    for (auto& row : point.rows) report.rows.push_back(std::move(row));
    for (auto& s : point.series) report.series.push_back(std::move(s));
    for (auto& [key, hash] : point.env_hashes) report.env_hashes[key] = hash;
  }
  return report;
}

namespace {

struct CsvSeries {
  std::string label;
  std::vector<double> x, y, se;
};

void write_csv(const std::filesystem::path& path,
               const std::vector<CsvSeries>& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "x,policy,mean,stderr\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << format_number(s.x[i]) << ',' << s.label << ','
          << format_number(s.y[i]) << ',' << format_number(s.se[i]) << '\n';
}

void write_svg(const std::filesystem::path& path,
               const std::vector<CsvSeries>& series, const std::string& title) {
  const double width = 720, height = 440;
  const double ml = 70, mr = 160, mt = 40, mb = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  auto sx = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
  };
  auto sy = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  // Axes.
  out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='"
      << width - mr << "' y2='" << height - mb
      << "' stroke='black' stroke-width='1'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << height - mb << "' stroke='black' stroke-width='1'/>\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = x_min + (x_max - x_min) * i / 4.0;
    double yv = y_min + (y_max - y_min) * i / 4.0;
    out << "<text x='" << sx(xv) << "' y='" << height - mb + 18
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << format_number(xv) << "</text>\n";
    out << "<text x='" << ml - 8 << "' y='" << sy(yv) + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
        << format_number(yv) << "</text>\n";
  }
  int idx = 0;
  for (const auto& s : series) {
    const char* color = colors[idx % 8];
    out << "<polyline fill='none' stroke='" << color
        << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    out << "'/>\n";
    out << "<text x='" << width - mr + 10 << "' y='" << mt + 16 * idx + 10
        << "' font-family='sans-serif' font-size='12' fill='" << color << "'>"
        << s.label << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace

std::filesystem::path write_report_csv(const RegretReport& report,
                                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path path = out_dir / "report.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "sweep_value,policy,window,replications,mean_regret,stderr_regret,"
         "mean_loss,idiosyncrasy,delay,classification";
  std::size_t num_types = 0;
  for (const auto& row : report.rows)
    num_types = std::max(num_types, row.mean_reviewed_per_type.size());
  for (std::size_t k = 0; k < num_types; ++k) out << ",reviewed_type" << k + 1;
  out << '\n';
  for (const auto& row : report.rows) {
    out << format_number(row.sweep_value) << ',' << row.policy << ','
        << row.window << ',' << row.replications << ','
        << format_number(row.mean_regret) << ','
        << format_number(row.stderr_regret) << ','
        << format_number(row.mean_loss) << ','
        << format_number(row.mean_decomposition.idiosyncrasy) << ','
        << format_number(row.mean_decomposition.delay) << ','
        << format_number(row.mean_decomposition.classification);
    for (std::size_t k = 0; k < num_types; ++k)
      out << ','
          << (k < row.mean_reviewed_per_type.size()
                  ? format_number(row.mean_reviewed_per_type[k])
                  : "");
    out << '\n';
  }
  return path;
}

std::vector<std::filesystem::path> emit_figures(
    const RegretReport& report, const Scenario& scenario,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  auto stem_for = [&](const std::string& kind) -> std::optional<std::string> {
    auto it = scenario.figures.find(kind);
    if (it != scenario.figures.end()) return it->second;
    return std::nullopt;
  };
  auto emit = [&](const std::string& kind, const std::string& title,
                  const std::vector<CsvSeries>& series) {
    if (series.empty()) return;
    bool any = false;
    for (const auto& s : series) any = any || !s.x.empty();
    if (!any) return;
    std::string stem = stem_for(kind).value_or(kind);
    std::filesystem::path csv = out_dir / (stem + ".csv");
    std::filesystem::path svg = out_dir / (stem + ".svg");
    write_csv(csv, series);
    write_svg(svg, series, title);
    written.push_back(csv);
    written.push_back(svg);
  };

  // Time-axis figures from series; emitted only for single-point reports
  // (sweep series from different parameter values would collide on the
  // policy label).
  std::set<double> series_points;
  for (const auto& s : report.series) series_points.insert(s.sweep_value);
  std::vector<CsvSeries> regret_vs_t;
  std::vector<CsvSeries> bounds_vs_t;
  std::vector<CsvSeries> reviewed_vs_t;
  for (const auto& s : report.series) {
    if (series_points.size() > 1) break;
    CsvSeries cs;
    cs.label = s.policy;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      cs.x.push_back(static_cast<double>(s.grid[i]));
      cs.y.push_back(s.regret_mean[i]);
      cs.se.push_back(s.regret_se[i]);
    }
    regret_vs_t.push_back(std::move(cs));
    for (std::size_t k = 0; k < s.h_lo_mean.size(); ++k) {
      CsvSeries lo, hi;
      lo.label = s.policy + ":h_lo_type" + std::to_string(k + 1);
      hi.label = s.policy + ":h_hi_type" + std::to_string(k + 1);
      for (std::size_t i = 0; i < s.grid.size(); ++i) {
        lo.x.push_back(static_cast<double>(s.grid[i]));
        lo.y.push_back(s.h_lo_mean[k][i]);
        lo.se.push_back(0.0);
        hi.x.push_back(static_cast<double>(s.grid[i]));
        hi.y.push_back(s.h_hi_mean[k][i]);
        hi.se.push_back(0.0);
      }
      bounds_vs_t.push_back(std::move(lo));
      bounds_vs_t.push_back(std::move(hi));
    }
    for (std::size_t k = 0; k < s.reviewed_mean.size(); ++k) {
      CsvSeries rc;
      rc.label = s.policy + ":reviewed_type" + std::to_string(k + 1);
      for (std::size_t i = 0; i < s.grid.size(); ++i) {
        rc.x.push_back(static_cast<double>(s.grid[i]));
        rc.y.push_back(s.reviewed_mean[k][i]);
        rc.se.push_back(0.0);
      }
      reviewed_vs_t.push_back(std::move(rc));
    }
  }
  emit("regret_vs_t", "average regret vs periods", regret_vs_t);
  emit("bounds_vs_t", "confidence bounds vs periods", bounds_vs_t);
  emit("reviewed_vs_t", "reviewed posts vs periods", reviewed_vs_t);

  // Sweep figures from rows (first window only).
  if (!report.rows.empty()) {
    std::map<std::string, CsvSeries> by_policy;
    Period w0 = report.windows.empty() ? 1 : report.windows.front();
    bool has_sweep = false;
    for (const auto& row : report.rows)
      if (row.sweep_value != 0.0) has_sweep = true;
    if (has_sweep) {
      for (const auto& row : report.rows) {
        if (row.window != w0) continue;
        CsvSeries& cs = by_policy[row.policy];
        cs.label = row.policy;
        cs.x.push_back(row.sweep_value);
        cs.y.push_back(row.mean_regret);
        cs.se.push_back(row.stderr_regret);
      }
      std::vector<CsvSeries> sweep_series;
      for (auto& [label, cs] : by_policy) sweep_series.push_back(cs);
      emit("regret_vs_sweep", "average regret vs " +
                                  (scenario.sweep ? scenario.sweep->param
                                                  : std::string("parameter")),
           sweep_series);

      // Paired per-seed regret gap between the scenario's first two
      // policies (first minus second), one point per sweep value.
      if (scenario.policies.size() >= 2) {
        auto label_of = [](const PolicySpec& spec) {
          return spec.name == "static_k"
                     ? "static_" + std::to_string(
                           spec.params.at("type").get<int>() + 1)
                     : spec.name;
        };
        std::string first = label_of(scenario.policies[0]);
        std::string second = label_of(scenario.policies[1]);
        CsvSeries gap;
        gap.label = first + "-" + second;
        std::map<double, const ReportRow*> rows_first, rows_second;
        for (const auto& row : report.rows) {
          if (row.window != w0) continue;
          if (row.policy == first) rows_first[row.sweep_value] = &row;
          if (row.policy == second) rows_second[row.sweep_value] = &row;
        }
        for (const auto& [value, row_a] : rows_first) {
          auto it = rows_second.find(value);
          if (it == rows_second.end()) continue;
          const ReportRow* row_b = it->second;
          std::vector<double> diffs;
          for (std::size_t r = 0; r < row_a->per_seed_regret.size() &&
                                  r < row_b->per_seed_regret.size();
               ++r)
            diffs.push_back(row_a->per_seed_regret[r] -
                            row_b->per_seed_regret[r]);
          gap.x.push_back(value);
          gap.y.push_back(mean_of(diffs));
          gap.se.push_back(stderr_of(diffs));
        }
        emit("gap_vs_sweep", "paired regret gap (" + gap.label + ")",
             std::vector<CsvSeries>{gap});
      }
    }
  }
  return written;
}

}  // namespace modsim
