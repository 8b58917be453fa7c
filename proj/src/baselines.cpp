#include "wproj/baselines.hpp"

#include <cmath>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
  return (a.first - o.first) * (b.second - o.second) -
         (a.second - o.second) * (b.first - o.first);
}

}  // namespace

std::vector<std::pair<double, double>> gcm(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw input_error("gcm: need at least two points");
  for (size_t i = 1; i < points.size(); ++i)
    if (!(points[i].first > points[i - 1].first))
      throw input_error("gcm: abscissae must be strictly increasing");
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : points) {
    // pop while the middle point is on or above the chord: keeps the lower
    // hull and drops collinear interior points
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  return hull;
}

PwAffineQuantile grenander_quantile(const EmpiricalMeasure& m) {
  if (!(m.x.front() > 0.0))
    throw input_error(
        "grenander requires strictly positive data (a non-increasing density "
        "on (0, inf) cannot carry mass at or below zero)");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(m.size() + 1);
  pts.emplace_back(0.0, 0.0);
  for (int i = 0; i < m.size(); ++i) pts.emplace_back(m.cw[i], m.x[i]);
  auto hull = gcm(pts);
  PwAffineQuantile out;
  out.part.u.reserve(hull.size());
  out.q.reserve(hull.size());
  for (const auto& p : hull) {
    out.part.u.push_back(p.first);
    out.q.push_back(p.second);
  }
  return out;
}

DensityModel grenander(const EmpiricalMeasure& m) {
  PwAffineQuantile gq = grenander_quantile(m);
  DensityModel d;
  d.support_lo = 0.0;
  d.support_hi = gq.q.back();
  const int k = gq.part.cells();
  d.segments.reserve(k);
  for (int i = 1; i <= k; ++i) {
    double dq = gq.q[i] - gq.q[i - 1];
    d.segments.push_back({gq.q[i - 1], gq.q[i], gq.part.du(i) / dq, 0.0});
  }
  return d;
}

}  // namespace wproj
