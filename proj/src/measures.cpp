#include "wproj/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wproj/errors.hpp"

namespace wproj {

namespace {
constexpr double kKnotDedup = 1e-14;
}

int Partition::cell_of(double t) const {
  auto it = std::lower_bound(u.begin(), u.end(), t);
  auto j = static_cast<int>(it - u.begin());
  if (j < 1) j = 1;
  if (j > cells()) j = cells();
  return j;
}

Partition uniform_partition(int k) {
  if (k < 1) throw input_error("partition needs at least one cell");
  Partition p;
  p.u.resize(k + 1);
  for (int i = 0; i <= k; ++i) p.u[i] = static_cast<double>(i) / k;
  p.u.front() = 0.0;
  p.u.back() = 1.0;
  return p;
}

Partition merge_partitions(const Partition& a, const Partition& b) {
  std::vector<double> pts;
  pts.reserve(a.u.size() + b.u.size());
  std::merge(a.u.begin(), a.u.end(), b.u.begin(), b.u.end(), std::back_inserter(pts));
  Partition out;
  out.u.push_back(0.0);
  for (double t : pts) {
    if (t <= out.u.back() + kKnotDedup || t >= 1.0 - kKnotDedup) continue;
    out.u.push_back(t);
  }
  out.u.push_back(1.0);
  return out;
}

EmpiricalMeasure build_empirical(const std::vector<double>& values,
                                 const std::vector<double>& weights) {
  if (values.empty()) throw input_error("empty dataset");
  const bool weighted = !weights.empty();
  if (weighted && weights.size() != values.size())
    throw input_error("weights and values differ in length");
  for (double v : values)
    if (!std::isfinite(v)) throw input_error("non-finite data value");
  if (weighted)
    for (double w : weights)
      if (!std::isfinite(w) || w <= 0.0) throw input_error("weights must be positive");

  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return values[i] < values[j]; });

  EmpiricalMeasure m;
  for (int idx : order) {
    double v = values[idx];
    double w = weighted ? weights[idx] : 1.0;
    if (!m.x.empty() && v == m.x.back()) {
      m.w.back() += w;  // exact duplicates merge
    } else {
      m.x.push_back(v);
      m.w.push_back(w);
    }
  }
  double total = std::accumulate(m.w.begin(), m.w.end(), 0.0);
  m.cw.resize(m.w.size());
  double run = 0;
  for (size_t i = 0; i < m.w.size(); ++i) {
    m.w[i] /= total;
    run += m.w[i];
    m.cw[i] = run;
  }
  m.cw.back() = 1.0;
  return m;
}

double quantile_of(const EmpiricalMeasure& m, double u) {
  if (!(u > 0.0 && u < 1.0)) throw input_error("quantile argument must lie in (0,1)");
  auto it = std::lower_bound(m.cw.begin(), m.cw.end(), u);
  return m.x[it - m.cw.begin()];
}

namespace {

std::vector<double> cell_values(const EmpiricalMeasure& m, const Partition& part) {
  std::vector<double> y(part.cells());
  for (int i = 1; i <= part.cells(); ++i)
    y[i - 1] = quantile_of(m, 0.5 * (part.u[i - 1] + part.u[i]));
  return y;
}

}  // namespace

StepQuantile discretize(const EmpiricalMeasure& m, int k) {
  if (k < 1) throw input_error("grid size must be >= 1");
  std::vector<double> pts;
  pts.reserve(m.cw.size() + k);
  for (double c : m.cw) pts.push_back(c);
  for (int i = 1; i < k; ++i) pts.push_back(static_cast<double>(i) / k);
  std::sort(pts.begin(), pts.end());

  Partition part;
  part.u.push_back(0.0);
  for (double t : pts) {
    if (t <= part.u.back() + kKnotDedup || t >= 1.0 - kKnotDedup) continue;
    part.u.push_back(t);
  }
  part.u.push_back(1.0);
  return {part, cell_values(m, part)};
}

StepQuantile discretize_on(const EmpiricalMeasure& m, const Partition& part) {
  // The quantile must be constant on every cell, i.e. the partition has to
  // refine the cumulative-weight breakpoints.
  for (double c : m.cw) {
    if (c >= 1.0 - kKnotDedup) break;
    auto it = std::lower_bound(part.u.begin(), part.u.end(), c - 1e-12);
    if (it == part.u.end() || std::abs(*it - c) > 1e-12)
      throw input_error("partition does not refine the measure's breakpoints");
  }
  return {part, cell_values(m, part)};
}

}  // namespace wproj
