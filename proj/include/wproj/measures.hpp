#pragma once

#include <cstdint>
#include <vector>

namespace wproj {

// Partition of (0,1]: 0 = u[0] < u[1] < ... < u[K] = 1.
struct Partition {
  std::vector<double> u;

  int cells() const { return static_cast<int>(u.size()) - 1; }
  double du(int i) const { return u[i] - u[i - 1]; }  // width of cell i, 1-based

  // Cell index i in 1..K with t in (u[i-1], u[i]]; t must lie in (0, 1].
  int cell_of(double t) const;
};

Partition uniform_partition(int k);

// Refinement containing every breakpoint of both inputs (1e-14 dedup).
Partition merge_partitions(const Partition& a, const Partition& b);

// Finitely supported probability measure: atoms sorted ascending, duplicates
// merged, weights positive and normalized to sum 1.
struct EmpiricalMeasure {
  std::vector<double> x;   // strictly increasing atom locations
  std::vector<double> w;   // matching weights, all > 0, sum = 1
  std::vector<double> cw;  // inclusive cumulative weights, cw.back() = 1

  int size() const { return static_cast<int>(x.size()); }
};

EmpiricalMeasure build_empirical(const std::vector<double>& values,
                                 const std::vector<double>& weights = {});

// Left-continuous generalized inverse of the CDF, u in (0,1).
double quantile_of(const EmpiricalMeasure& m, double u);

// Piecewise-constant quantile: value y[i-1] on (u[i-1], u[i]].
struct StepQuantile {
  Partition part;
  std::vector<double> y;

  double eval(double u) const { return y[part.cell_of(u) - 1]; }
};

// Step representation of the empirical quantile on the union of the measure's
// cumulative-weight breakpoints and a uniform k-grid, so the quantile is
// exactly constant on every cell.
StepQuantile discretize(const EmpiricalMeasure& m, int k);

// Same, but on a caller-supplied partition that must already refine the
// measure's breakpoints (used to put two measures on one grid).
StepQuantile discretize_on(const EmpiricalMeasure& m, const Partition& part);

}  // namespace wproj
