#include "modsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace modsim {

double Schedule::at(Period t) const {
  // Last segment with from_t <= t.
  double value = 0.0;
  for (const auto& seg : segments_) {
    if (seg.from_t > t) break;
    value = seg.value;
  }
  return value;
}

std::vector<std::string> Schedule::validate() const {
  std::vector<std::string> problems;
  if (segments_.empty()) {
    problems.push_back("schedule has no segments");
    return problems;
  }
  if (segments_.front().from_t != 1)
    problems.push_back("first segment must start at period 1");
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (segments_[i].from_t <= segments_[i - 1].from_t)
      problems.push_back("segment starts must be strictly increasing");
  }
  return problems;
}

double EnvConfig::total_arrival_rate(Period t) const {
  double sum = 0.0;
  for (const auto& sched : arrival_rates) sum += sched.at(t);
  return sum;
}

Period EnvConfig::max_lifetime() const {
  Period m = 1;
  for (const auto& tp : types) m = std::max(m, tp.lifetime);
  return m;
}

double EnvConfig::max_capacity() const {
  double m = 0.0;
  for (const auto& seg : capacity.segments())
    if (seg.from_t <= horizon) m = std::max(m, seg.value);
  return m;
}

std::vector<Period> EnvConfig::breakpoints() const {
  std::set<Period> points{1};
  for (const auto& sched : arrival_rates)
    for (const auto& seg : sched.segments()) points.insert(seg.from_t);
  for (const auto& seg : capacity.segments()) points.insert(seg.from_t);
  std::vector<Period> out;
  for (Period p : points)
    if (p >= 1 && p <= horizon) out.push_back(p);
  if (out.empty()) out.push_back(1);
  return out;
}

std::vector<double> EnvConfig::feature_of(int k) const {
  if (!types[k].feature.empty()) return types[k].feature;
  std::vector<double> onehot(types.size(), 0.0);
  onehot[k] = 1.0;
  return onehot;
}

int EnvConfig::feature_dim() const {
  for (const auto& tp : types)
    if (!tp.feature.empty()) return static_cast<int>(tp.feature.size());
  return num_types();
}

namespace {

std::string type_loc(int k) { return "types[" + std::to_string(k) + "]"; }

}  // namespace

std::vector<Violation> validate_env(const EnvConfig& env) {
  std::vector<Violation> out;
  if (env.horizon < 0) out.push_back({"horizon", "must be >= 0"});
  if (env.r_max < 1.0) out.push_back({"r_max", "must be >= 1"});
  if (!(env.sigma_max > 0.0)) out.push_back({"sigma_max", "must be > 0"});
  if (env.U < 1.0) out.push_back({"U", "must be >= 1"});
  if (env.arrival_rates.size() != env.types.size())
    out.push_back({"arrival_rates", "need exactly one schedule per type"});

  for (int k = 0; k < env.num_types(); ++k) {
    const TypeParams& tp = env.types[k];
    if (tp.type_id != k)
      out.push_back({type_loc(k), "type_id must equal its position"});
    if (tp.lifetime < 1) out.push_back({type_loc(k), "lifetime must be >= 1"});
    if (tp.service_rate < 0.0 || tp.service_rate > 1.0)
      out.push_back({type_loc(k), "service_rate must lie in [0,1]"});
    for (const auto& problem : tp.dist.validate())
      out.push_back({type_loc(k) + ".dist", problem});
    if (tp.dist.validate().empty()) {
      CostMoments m = moments(tp.dist);
      if (m.keep_cost + m.remove_cost > env.r_max + 1e-12)
        out.push_back({type_loc(k), "E|c| exceeds r_max"});
      if (tp.dist.sigma2 > env.sigma_max * env.sigma_max + 1e-12)
        out.push_back({type_loc(k), "declared sigma2 exceeds sigma_max^2"});
    }
    if (!tp.feature.empty()) {
      double norm2 = 0.0;
      for (double x : tp.feature) norm2 += x * x;
      if (std::sqrt(norm2) > env.U + 1e-12)
        out.push_back({type_loc(k), "feature norm exceeds U"});
      if (static_cast<int>(tp.feature.size()) != env.feature_dim())
        out.push_back({type_loc(k), "feature dimension mismatch"});
    }
  }

  for (const auto& sched : env.arrival_rates)
    for (const auto& problem : sched.validate())
      out.push_back({"arrival_rates", problem});
  for (const auto& problem : env.capacity.validate())
    out.push_back({"capacity", problem});
  if (!out.empty()) return out;  // schedule lookups below need valid shapes

  for (Period t : env.breakpoints()) {
    double total = 0.0;
    for (int k = 0; k < env.num_types(); ++k) {
      double lam = env.arrival_rate(k, t);
      if (lam < 0.0 || lam > 1.0)
        out.push_back({"arrival_rates[" + std::to_string(k) + "]",
                       "rate outside [0,1] at t=" + std::to_string(t)});
      total += lam;
    }
    if (total > 1.0 + 1e-12)
      out.push_back(
          {"arrival_rates", "sum of rates > 1 at t=" + std::to_string(t)});
    double n = env.capacity_at(t);
    if (n < 0.0 || n != std::floor(n))
      out.push_back(
          {"capacity", "N(t) must be a nonnegative integer at t=" +
                           std::to_string(t)});
    for (int k = 0; k < env.num_types(); ++k) {
      if (n * env.types[k].service_rate > 1.0 + 1e-12)
        out.push_back({type_loc(k), "N(t)*mu > 1 at t=" + std::to_string(t)});
    }
  }
  return out;
}

namespace {

void to_json(nlohmann::json& j, const Schedule& s) {
  j = nlohmann::json::array();
  for (const auto& seg : s.segments())
    j.push_back({{"from_t", seg.from_t}, {"value", seg.value}});
}

Schedule schedule_from_json(const nlohmann::json& j) {
  std::vector<ScheduleSegment> segs;
  for (const auto& item : j)
    segs.push_back(
        {item.at("from_t").get<Period>(), item.at("value").get<double>()});
  return Schedule(std::move(segs));
}

}  // namespace

void to_json(nlohmann::json& j, const EnvConfig& env) {
  nlohmann::json arrivals = nlohmann::json::array();
  for (const auto& sched : env.arrival_rates) {
    nlohmann::json js;
    to_json(js, sched);
    arrivals.push_back(js);
  }
  nlohmann::json capacity;
  to_json(capacity, env.capacity);
  nlohmann::json types = nlohmann::json::array();
  for (const auto& tp : env.types) {
    nlohmann::json jt{{"type_id", tp.type_id},
                      {"lifetime", tp.lifetime},
                      {"service_rate", tp.service_rate},
                      {"dist", tp.dist}};
    if (!tp.feature.empty()) jt["feature"] = tp.feature;
    types.push_back(jt);
  }
  j = nlohmann::json{{"horizon", env.horizon},
                     {"arrival_rates", arrivals},
                     {"capacity", capacity},
                     {"types", types},
                     {"r_max", env.r_max},
                     {"sigma_max", env.sigma_max},
                     {"U", env.U}};
}

void from_json(const nlohmann::json& j, EnvConfig& env) {
  env = EnvConfig{};
  env.horizon = j.at("horizon").get<Period>();
  for (const auto& js : j.at("arrival_rates"))
    env.arrival_rates.push_back(schedule_from_json(js));
  env.capacity = schedule_from_json(j.at("capacity"));
  for (const auto& jt : j.at("types")) {
    TypeParams tp;
    tp.type_id = jt.at("type_id").get<int>();
    tp.lifetime = jt.at("lifetime").get<Period>();
    tp.service_rate = jt.at("service_rate").get<double>();
    tp.dist = jt.at("dist").get<CostDistribution>();
    if (jt.contains("feature"))
      tp.feature = jt.at("feature").get<std::vector<double>>();
    env.types.push_back(std::move(tp));
  }
  env.r_max = j.value("r_max", 1.0);
  env.sigma_max = j.value("sigma_max", 1.0);
  env.U = j.value("U", 1.0);
}

EnvConfig load_env_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open env file: " + path);
  nlohmann::json j;
  in >> j;
  return j.get<EnvConfig>();
}

}  // namespace modsim
