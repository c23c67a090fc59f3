#pragma once

#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace modsim {

enum class DistKind { two_point, normal };

/// Per-period cost distribution of a post type.
///
/// Costs are signed: negative means the post is benign. Every distribution
/// declares a sub-Gaussian variance proxy `sigma2`; it is validated against
/// the variant (Normal: sigma2 >= std^2, two-point on {a,b}:
/// sigma2 >= (b-a)^2/4) rather than inferred, because the learning policies
/// take the proxy as an input.
struct CostDistribution {
  DistKind kind = DistKind::two_point;

  // two_point
  double value_pos = 1.0;
  double value_neg = -1.0;
  double prob_pos = 0.5;

  // normal
  double mean = 0.0;
  double std_dev = 1.0;

  double sigma2 = 1.0;

  /// Two-point distribution; sigma2 < 0 selects the tight proxy (b-a)^2/4.
  static CostDistribution two_point(double value_pos, double value_neg,
                                    double prob_pos, double sigma2 = -1.0);
  /// Normal distribution; sigma2 < 0 selects the tight proxy std^2.
  static CostDistribution normal(double mean, double std_dev,
                                 double sigma2 = -1.0);

  double mean_cost() const;
  double abs_mean() const;  // E|c|
  std::vector<std::string> validate() const;

  friend bool operator==(const CostDistribution&,
                         const CostDistribution&) = default;
};

/// Closed-form expectations of a cost distribution.
///
/// keep_cost  = E[c^+]        expected per-period loss of keeping unreviewed
/// remove_cost= E[-(c^-)]     expected per-period loss of removing unreviewed
/// mean_cost  = keep_cost - remove_cost
/// idiosyncrasy_rate = min(keep_cost, remove_cost)
struct CostMoments {
  double keep_cost = 0.0;
  double remove_cost = 0.0;
  double mean_cost = 0.0;
  double idiosyncrasy_rate = 0.0;
};

CostMoments moments(const CostDistribution& dist);

/// One draw from the distribution. Same engine state => same draw.
double sample_cost(const CostDistribution& dist, std::mt19937_64& rng);

void to_json(nlohmann::json& j, const CostDistribution& d);
void from_json(const nlohmann::json& j, CostDistribution& d);

}  // namespace modsim
