#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wproj/quantiles.hpp"

namespace wproj {

// Reference distributions with known quantiles for experiments: point mass,
// uniform, exponential, gamma, normal, and finite mixtures of those.
struct TruthComponent {
  enum class Kind { PointMass, Uniform, Exponential, Gamma, Normal };
  Kind kind;
  double p1 = 0;  // location / lower end / rate / shape / mean
  double p2 = 0;  // upper end / rate / sigma (unused for point mass, exp)
};

struct TruthSpec {
  std::vector<TruthComponent> comp;
  std::vector<double> weight;  // positive, sums to 1; singleton for non-mixtures
  std::string name;
};

double truth_cdf(const TruthSpec& t, double x);
// Mixture quantiles are inverted numerically (bracketed bisection + Newton).
double truth_quantile(const TruthSpec& t, double u);
// Quantile-transform sampling with the same generator contract as sample().
std::vector<double> truth_sample(const TruthSpec& t, int n, std::uint64_t seed);

AnalyticQuantile truth_as_quantile(const TruthSpec& t);

}  // namespace wproj
