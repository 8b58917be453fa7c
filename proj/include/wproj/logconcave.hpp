#pragma once

#include <vector>

#include "wproj/density.hpp"
#include "wproj/measures.hpp"
#include "wproj/qp.hpp"
#include "wproj/quantiles.hpp"

namespace wproj {

// W2 projection onto log-concave laws, parametrized by c = Q(0) and the
// reciprocal slope h = 1/Q' sampled at the knots (h positive, concave,
// piecewise affine on the partition).
struct LogConcaveFit {
  Partition part;
  double c = 0;
  std::vector<double> h;  // size cells()+1
  std::vector<double> q;  // derived knots, q[0] = c, strictly increasing
  SolverReport report;
  double w2 = 0;
  // Degenerate branch: single-atom data projects to itself, no density.
  bool point_mass = false;
  double atom = 0;

  Quantile quantile() const;
};

// Knots of Q_{c,h}: q_i = q_{i-1} + (du_i / h_{i-1}) phi(delta_i).
std::vector<double> q_knots(double c, const std::vector<double>& h,
                            const Partition& part);

// \int_0^1 (Q_{c,h} - Q_y)^2 du via the per-cell closed forms in phi_moments.
double logconcave_objective(double c, const std::vector<double>& h,
                            const Partition& part, const std::vector<double>& y);

// Exact gradient in (c, h_0..h_K), length K+2, accumulated in reverse through
// the knot recursion.
std::vector<double> logconcave_gradient(double c, const std::vector<double>& h,
                                        const Partition& part,
                                        const std::vector<double>& y);

struct LogConcaveConfig {
  // Stop when the projected-gradient norm is <= grad_tol * (1 + |objective|).
  double grad_tol = 1e-7;
  int max_iter = 10000;
  bool nonneg_support = false;  // adds the constraint c >= 0
  SolverConfig qp;              // inner feasibility-projection solver
};

LogConcaveFit fit_logconcave(const EmpiricalMeasure& m, int k = 0,
                             const LogConcaveConfig& cfg = {});
LogConcaveFit fit_logconcave(const StepQuantile& q0,
                             const LogConcaveConfig& cfg = {});

// Piecewise log-affine density: f = h_{i-1} exp((h_{i-1} delta_i / du_i)
// (x - q_{i-1})) on (q_{i-1}, q_i); continuous at knots with value h_i.
DensityModel logconcave_density(const LogConcaveFit& fit);

}  // namespace wproj
