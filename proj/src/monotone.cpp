#include "wproj/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "wproj/baselines.hpp"
#include "wproj/errors.hpp"

namespace wproj {

double monotone_objective(const std::vector<double>& q, const Partition& part,
                          const std::vector<double>& y) {
  const int k = part.cells();
  if (static_cast<int>(q.size()) != k + 1 || static_cast<int>(y.size()) != k)
    throw input_error("monotone_objective: length mismatch");
  double f = 0;
  for (int i = 1; i <= k; ++i) {
    double a = q[i - 1], b = q[i], yi = y[i - 1];
    f += (part.du(i) / 3.0) *
         (a * a + b * b + a * b - 3.0 * yi * (a + b) + 3.0 * yi * yi);
  }
  return f;
}

QuadraticProgram build_monotone_qp(const Partition& part, const std::vector<double>& y) {
  const int k = part.cells();
  if (static_cast<int>(y.size()) != k)
    throw input_error("build_monotone_qp: length mismatch");
  for (int i = 1; i < k; ++i)
    if (y[i] < y[i - 1]) throw input_error("build_monotone_qp: step values must be non-decreasing");

  QuadraticProgram qp;
  // Free knots q1..qK with q0 = 0; expanding the per-cell quadratic gives a
  // tridiagonal Hessian: P[i][i] = 2(du_i + du_{i+1})/3, P[i][i+1] = du_{i+1}/3
  // (du_{K+1} = 0), and a[i] = -(du_i y_i + du_{i+1} y_{i+1}).
  std::vector<Eigen::Triplet<double>> pt;
  qp.a = Eigen::VectorXd::Zero(k);
  for (int i = 1; i <= k; ++i) {
    double du_i = part.du(i);
    double du_n = i < k ? part.du(i + 1) : 0.0;
    pt.emplace_back(i - 1, i - 1, 2.0 * (du_i + du_n) / 3.0);
    if (i < k) {
      pt.emplace_back(i - 1, i, du_n / 3.0);
      pt.emplace_back(i, i - 1, du_n / 3.0);
    }
    qp.a[i - 1] = -(du_i * y[i - 1] + (i < k ? du_n * y[i] : 0.0));
  }
  qp.P = Eigen::SparseMatrix<double>(k, k);
  qp.P.setFromTriplets(pt.begin(), pt.end());

  // K monotonicity rows (q1 >= 0, q_i - q_{i-1} >= 0), then K-1 convexity
  // rows du_i q_{i+1} - (du_i + du_{i+1}) q_i + du_{i+1} q_{i-1} >= 0.
  std::vector<Eigen::Triplet<double>> ct;
  for (int i = 1; i <= k; ++i) {
    ct.emplace_back(i - 1, i - 1, 1.0);
    if (i >= 2) ct.emplace_back(i - 1, i - 2, -1.0);
  }
  for (int i = 1; i < k; ++i) {
    int r = k + i - 1;
    double du_i = part.du(i), du_n = part.du(i + 1);
    ct.emplace_back(r, i, du_i);
    ct.emplace_back(r, i - 1, -(du_i + du_n));
    if (i >= 2) ct.emplace_back(r, i - 2, du_n);
  }
  qp.C = Eigen::SparseMatrix<double>(2 * k - 1, k);
  qp.C.setFromTriplets(ct.begin(), ct.end());
  qp.b = Eigen::VectorXd::Zero(2 * k - 1);
  return qp;
}

MonotoneFit fit_monotone(const StepQuantile& q0, const SolverConfig& cfg) {
  if (q0.y.empty() || q0.y.front() <= 0.0)
    throw input_error(
        "monotone model requires strictly positive data (a non-increasing "
        "density on (0, inf) cannot carry mass at or below zero)");
  const int k = q0.part.cells();
  QuadraticProgram qp = build_monotone_qp(q0.part, q0.y);

  SolverConfig run = cfg;
  if (run.warm_active.empty()) {
    // The greatest convex minorant of the data predicts the solution's shape:
    // within a hull segment the convexity rows bind, at a hull vertex they do
    // not.  Seeding the solver's polish with that pattern usually makes the
    // first factorization exact and skips the splitting iterations entirely.
    std::vector<std::pair<double, double>> pts;
    pts.reserve(k + 1);
    pts.emplace_back(0.0, 0.0);
    for (int i = 1; i <= k; ++i) pts.emplace_back(q0.part.u[i], q0.y[i - 1]);
    std::vector<std::pair<double, double>> hull = gcm(pts);
    std::vector<double> qg(k + 1, 0.0);
    for (int i = 1, seg = 0; i <= k; ++i) {
      double u = q0.part.u[i];
      while (hull[seg + 1].first < u && seg + 2 < static_cast<int>(hull.size())) ++seg;
      double t = (u - hull[seg].first) / (hull[seg + 1].first - hull[seg].first);
      qg[i] = hull[seg].second + t * (hull[seg + 1].second - hull[seg].second);
    }
    double scale = std::max(1.0, std::abs(qg[k]));
    std::vector<char> seed(2 * k - 1, 0);
    for (int i = 1; i <= k; ++i)
      if (qg[i] - qg[i - 1] <= 1e-12 * scale) seed[i - 1] = 1;
    for (int i = 1; i < k; ++i) {
      double s_i = (qg[i] - qg[i - 1]) / q0.part.du(i);
      double s_n = (qg[i + 1] - qg[i]) / q0.part.du(i + 1);
      if (s_n - s_i <= 1e-10 * (1.0 + std::abs(s_i) + std::abs(s_n)))
        seed[k + i - 1] = 1;
    }
    run.warm_active = std::move(seed);
    run.warm_x.assign(qg.begin() + 1, qg.end());
  }
  QpSolution sol = solve_qp(qp, run);

  MonotoneFit fit;
  fit.part = q0.part;
  fit.report = sol.report;
  fit.q.resize(k + 1);
  fit.q[0] = 0.0;
  for (int i = 1; i <= k; ++i) fit.q[i] = std::max(sol.x[i - 1], fit.q[i - 1]);
  fit.w2 = std::sqrt(std::max(0.0, monotone_objective(fit.q, fit.part, q0.y)));
  return fit;
}

MonotoneFit fit_monotone(const EmpiricalMeasure& m, int k, const SolverConfig& cfg) {
  if (m.x.front() <= 0.0)
    throw input_error(
        "monotone model requires strictly positive data (a non-increasing "
        "density on (0, inf) cannot carry mass at or below zero)");
  if (k <= 0) k = std::max(64, m.size());
  return fit_monotone(discretize(m, k), cfg);
}

DensityModel monotone_density(const MonotoneFit& fit) {
  const int k = fit.part.cells();
  const double scale = std::max(1.0, std::abs(fit.q[k]));
  if (fit.q[k] - fit.q[0] <= 1e-12 * scale)
    throw input_error("monotone_density: all knots equal, no density exists");

  DensityModel d;
  d.support_lo = 0.0;
  d.support_hi = fit.q[k];
  for (int i = 1; i <= k; ++i) {
    double width = fit.q[i] - fit.q[i - 1];
    double mass = fit.part.du(i);
    if (width <= 1e-12 * scale) {
      // Flat quantile over a cell of positive measure: an atom, not density.
      d.boundary_atom = true;
      d.atom_mass += mass;
      continue;
    }
    double height = mass / width;
    if (!d.segments.empty() &&
        std::abs(d.segments.back().f_lo - height) <= 1e-12 * d.segments.back().f_lo) {
      d.segments.back().x_hi = fit.q[i];  // merge equal-height neighbors
    } else {
      d.segments.push_back({fit.q[i - 1], fit.q[i], height, 0.0});
    }
  }
  return d;
}

}  // namespace wproj
