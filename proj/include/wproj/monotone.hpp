#pragma once

#include <vector>

#include "wproj/density.hpp"
#include "wproj/measures.hpp"
#include "wproj/qp.hpp"
#include "wproj/quantiles.hpp"

namespace wproj {

// L2 projection of a step quantile onto the cone of convex, non-decreasing,
// piecewise-affine quantiles with q(0) = 0, i.e. the quantile side of
// non-increasing densities on (0, inf).
struct MonotoneFit {
  Partition part;
  std::vector<double> q;  // size cells()+1, q[0] = 0
  SolverReport report;
  double w2 = 0;  // distance to the discretized data

  PwAffineQuantile quantile() const { return {part, q}; }
};

// \int_0^1 (Q_q - Q_y)^2 du for the piecewise-affine quantile through q and
// the step quantile y on the same partition.
double monotone_objective(const std::vector<double>& q, const Partition& part,
                          const std::vector<double>& y);

// The same objective as 1/2 q'Pq + a'q + const in the free knots q1..qK
// (q0 is fixed at 0 and eliminated), with the K monotonicity rows and K-1
// slope-convexity rows as Cq >= 0.  const = sum du_i y_i^2.
QuadraticProgram build_monotone_qp(const Partition& part,
                                   const std::vector<double>& y);

// k <= 0 picks the default grid size max(64, number of distinct atoms).
MonotoneFit fit_monotone(const EmpiricalMeasure& m, int k = 0,
                         const SolverConfig& cfg = {});
// Fit directly on an existing discretization (shared-grid comparisons).
MonotoneFit fit_monotone(const StepQuantile& q0, const SolverConfig& cfg = {});

// Reciprocal-slope density: height du_i / (q_i - q_{i-1}) on (q_{i-1}, q_i].
// Zero-width steps are merged and flagged as a boundary atom.
DensityModel monotone_density(const MonotoneFit& fit);

}  // namespace wproj
