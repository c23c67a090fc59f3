#include "modsim/cost_model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace modsim {

namespace {

double std_normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

CostDistribution CostDistribution::two_point(double value_pos, double value_neg,
                                             double prob_pos, double sigma2) {
  CostDistribution d;
  d.kind = DistKind::two_point;
  d.value_pos = value_pos;
  d.value_neg = value_neg;
  d.prob_pos = prob_pos;
  double gap = value_pos - value_neg;
  d.sigma2 = sigma2 < 0 ? gap * gap / 4.0 : sigma2;
  return d;
}

CostDistribution CostDistribution::normal(double mean, double std_dev,
                                          double sigma2) {
  CostDistribution d;
  d.kind = DistKind::normal;
  d.mean = mean;
  d.std_dev = std_dev;
  d.sigma2 = sigma2 < 0 ? std_dev * std_dev : sigma2;
  return d;
}

double CostDistribution::mean_cost() const {
  switch (kind) {
    case DistKind::two_point:
      return prob_pos * value_pos + (1.0 - prob_pos) * value_neg;
    case DistKind::normal:
      return mean;
  }
  return 0.0;
}

double CostDistribution::abs_mean() const {
  CostMoments m = moments(*this);
  return m.keep_cost + m.remove_cost;  // E|c| = E[c^+] + E[-(c^-)]
}

std::vector<std::string> CostDistribution::validate() const {
  std::vector<std::string> problems;
  switch (kind) {
    case DistKind::two_point: {
      if (!(prob_pos >= 0.0 && prob_pos <= 1.0))
        problems.push_back("prob_pos must lie in [0,1]");
      if (!std::isfinite(value_pos) || !std::isfinite(value_neg))
        problems.push_back("two-point values must be finite");
      double gap = value_pos - value_neg;
      if (sigma2 < gap * gap / 4.0 - 1e-12)
        problems.push_back("sigma2 below (b-a)^2/4, not a valid proxy");
      break;
    }
    case DistKind::normal: {
      if (!(std_dev > 0.0)) problems.push_back("std must be > 0");
      if (sigma2 < std_dev * std_dev - 1e-12)
        problems.push_back("sigma2 below std^2, not a valid proxy");
      break;
    }
  }
  if (!(sigma2 >= 0.0)) problems.push_back("sigma2 must be >= 0");
  return problems;
}

CostMoments moments(const CostDistribution& dist) {
  CostMoments m;
  switch (dist.kind) {
    case DistKind::two_point: {
      double p = dist.prob_pos;
      m.keep_cost = p * std::max(dist.value_pos, 0.0) +
                    (1.0 - p) * std::max(dist.value_neg, 0.0);
      m.remove_cost = p * std::max(-dist.value_pos, 0.0) +
                      (1.0 - p) * std::max(-dist.value_neg, 0.0);
      break;
    }
    case DistKind::normal: {
      double z = dist.mean / dist.std_dev;
      m.keep_cost =
          dist.mean * std_normal_cdf(z) + dist.std_dev * std_normal_pdf(z);
      m.remove_cost = m.keep_cost - dist.mean;
      break;
    }
  }
  m.mean_cost = m.keep_cost - m.remove_cost;
  m.idiosyncrasy_rate = std::min(m.keep_cost, m.remove_cost);
  return m;
}

double sample_cost(const CostDistribution& dist, std::mt19937_64& rng) {
  switch (dist.kind) {
    case DistKind::two_point: {
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      return u < dist.prob_pos ? dist.value_pos : dist.value_neg;
    }
    case DistKind::normal: {
      double z = std::normal_distribution<double>(0.0, 1.0)(rng);
      return dist.mean + dist.std_dev * z;
    }
  }
  return 0.0;
}

void to_json(nlohmann::json& j, const CostDistribution& d) {
  switch (d.kind) {
    case DistKind::two_point:
      j = nlohmann::json{{"kind", "two_point"},
                         {"value_pos", d.value_pos},
                         {"value_neg", d.value_neg},
                         {"prob_pos", d.prob_pos},
                         {"sigma2", d.sigma2}};
      break;
    case DistKind::normal:
      j = nlohmann::json{{"kind", "normal"},
                         {"mean", d.mean},
                         {"std", d.std_dev},
                         {"sigma2", d.sigma2}};
      break;
  }
}

void from_json(const nlohmann::json& j, CostDistribution& d) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "two_point") {
    d = CostDistribution::two_point(
        j.at("value_pos").get<double>(), j.at("value_neg").get<double>(),
        j.at("prob_pos").get<double>(), j.value("sigma2", -1.0));
  } else if (kind == "normal") {
    d = CostDistribution::normal(j.at("mean").get<double>(),
                                 j.at("std").get<double>(),
                                 j.value("sigma2", -1.0));
  } else {
    throw std::invalid_argument("unknown cost distribution kind: " + kind);
  }
}

}  // namespace modsim
