#include "wproj/truths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

void check_spec(const TruthSpec& t) {
  if (t.comp.empty() || t.comp.size() != t.weight.size())
    throw input_error("truth spec: components and weights must match and be non-empty");
  double s = 0;
  for (double w : t.weight) {
    if (!(w > 0)) throw input_error("truth spec: weights must be positive");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-9) throw input_error("truth spec: weights must sum to 1");
}

double comp_cdf(const TruthComponent& c, double x) {
  switch (c.kind) {
    case TruthComponent::Kind::PointMass:
      return x >= c.p1 ? 1.0 : 0.0;
    case TruthComponent::Kind::Uniform: {
      if (x <= c.p1) return 0.0;
      if (x >= c.p2) return 1.0;
      return (x - c.p1) / (c.p2 - c.p1);
    }
    case TruthComponent::Kind::Exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-c.p1 * x);
    case TruthComponent::Kind::Gamma:
      return x <= 0.0 ? 0.0 : boost::math::gamma_p(c.p1, c.p2 * x);
    case TruthComponent::Kind::Normal:
      return 0.5 * std::erfc(-(x - c.p1) / (c.p2 * std::sqrt(2.0)));
  }
  return 0.0;
}

double comp_quantile(const TruthComponent& c, double u) {
  switch (c.kind) {
    case TruthComponent::Kind::PointMass:
      return c.p1;
    case TruthComponent::Kind::Uniform:
      return c.p1 + u * (c.p2 - c.p1);
    case TruthComponent::Kind::Exponential:
      return -std::log1p(-u) / c.p1;
    case TruthComponent::Kind::Gamma:
      return boost::math::gamma_p_inv(c.p1, u) / c.p2;
    case TruthComponent::Kind::Normal:
      return c.p1 + c.p2 * std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
  }
  return 0.0;
}

}  // namespace

double truth_cdf(const TruthSpec& t, double x) {
  check_spec(t);
  double f = 0;
  for (size_t i = 0; i < t.comp.size(); ++i) f += t.weight[i] * comp_cdf(t.comp[i], x);
  return f;
}

double truth_quantile(const TruthSpec& t, double u) {
  check_spec(t);
  if (!(u > 0.0 && u < 1.0)) throw input_error("truth quantile: u must lie in (0, 1)");
  if (t.comp.size() == 1) return comp_quantile(t.comp[0], u);
  // Mixture inverse: the smallest x with F(x) >= u lies between the smallest
  // and largest component quantiles at u; bisection also lands on atoms.
  double lo = comp_quantile(t.comp[0], u), hi = lo;
  for (size_t i = 1; i < t.comp.size(); ++i) {
    double qi = comp_quantile(t.comp[i], u);
    lo = std::min(lo, qi);
    hi = std::max(hi, qi);
  }
  if (hi - lo <= 0) return lo;
  lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (truth_cdf(t, mid) >= u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::vector<double> truth_sample(const TruthSpec& t, int n, std::uint64_t seed) {
  if (n <= 0) throw input_error("truth sample: n must be positive");
  std::mt19937_64 gen(seed);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    out[i] = truth_quantile(t, u);
  }
  return out;
}

AnalyticQuantile truth_as_quantile(const TruthSpec& t) {
  check_spec(t);
  TruthSpec copy = t;
  return AnalyticQuantile{[copy](double u) { return truth_quantile(copy, u); }};
}

}  // namespace wproj
