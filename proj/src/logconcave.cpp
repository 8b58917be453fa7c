#include "wproj/logconcave.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "wproj/errors.hpp"
#include "wproj/phi.hpp"

namespace wproj {

namespace {

void check_h(const std::vector<double>& h, const Partition& part) {
  if (static_cast<int>(h.size()) != part.cells() + 1)
    throw input_error("reciprocal-slope vector must have one entry per knot");
  for (double v : h)
    if (!(v > 0.0)) throw input_error("reciprocal slopes must be positive");
}

}  // namespace

std::vector<double> q_knots(double c, const std::vector<double>& h, const Partition& part) {
  check_h(h, part);
  const int k = part.cells();
  std::vector<double> q(k + 1);
  q[0] = c;
  for (int i = 1; i <= k; ++i) {
    double delta = h[i] / h[i - 1] - 1.0;
    q[i] = q[i - 1] + (part.du(i) / h[i - 1]) * phi(delta);
  }
  return q;
}

double logconcave_objective(double c, const std::vector<double>& h,
                            const Partition& part, const std::vector<double>& y) {
  check_h(h, part);
  const int k = part.cells();
  if (static_cast<int>(y.size()) != k) throw input_error("logconcave_objective: length mismatch");
  double f = 0, qprev = c;
  for (int i = 1; i <= k; ++i) {
    double du = part.du(i);
    double delta = h[i] / h[i - 1] - 1.0;
    PhiMoments m = phi_moments(delta);
    double dvi = qprev - y[i - 1];
    f += dvi * dvi * du + 2.0 * dvi * du * du * m.a / h[i - 1] +
         du * du * du * m.b / (h[i - 1] * h[i - 1]);
    qprev += (du / h[i - 1]) * phi(delta);
  }
  return f;
}

std::vector<double> logconcave_gradient(double c, const std::vector<double>& h,
                                        const Partition& part,
                                        const std::vector<double>& y) {
  check_h(h, part);
  const int k = part.cells();
  if (static_cast<int>(y.size()) != k) throw input_error("logconcave_gradient: length mismatch");

  std::vector<double> q = q_knots(c, h, part);
  // Per-cell pieces: f_i depends on q_{i-1} directly and on (h_{i-1}, h_i)
  // both directly and through every later knot.  gq[i] = df_i/dq_{i-1};
  // suffix[i] = sum_{j >= i} gq[j] collects the knot-recursion chain.
  std::vector<double> gq(k + 2, 0.0), suffix(k + 3, 0.0);
  std::vector<double> dA(k + 1), dB(k + 1), A(k + 1), B(k + 1), delta(k + 1);
  for (int i = 1; i <= k; ++i) {
    delta[i] = h[i] / h[i - 1] - 1.0;
    PhiMoments m = phi_moments(delta[i]);
    PhiMomentDerivs md = phi_moment_derivs(delta[i]);
    A[i] = m.a;
    B[i] = m.b;
    dA[i] = md.da;
    dB[i] = md.db;
    double du = part.du(i);
    gq[i] = 2.0 * (q[i - 1] - y[i - 1]) * du + 2.0 * du * du * A[i] / h[i - 1];
  }
  for (int i = k; i >= 1; --i) suffix[i] = suffix[i + 1] + gq[i];

  std::vector<double> grad(k + 2, 0.0);
  grad[0] = suffix[1];  // dF/dc: every knot shifts with c

  for (int j = 0; j <= k; ++j) {
    double g = 0;
    if (j >= 1) {
      // h_j is the right-hand argument of cell j.
      int i = j;
      double du = part.du(i);
      double hi = h[i - 1];
      double dd = 1.0 / hi;  // ddelta_i/dh_j
      double dvi = q[i - 1] - y[i - 1];
      g += (2.0 * dvi * du * du * dA[i] / hi + du * du * du * dB[i] / (hi * hi)) * dd;
      // knot chain: dq_i/dh_j = (du/hi) phi'(delta) / hi
      if (i + 1 <= k) g += (du / hi) * phi_prime(delta[i]) * dd * suffix[i + 1];
    }
    if (j <= k - 1) {
      // h_j is the left-hand argument of cell j+1.
      int i = j + 1;
      double du = part.du(i);
      double hj = h[j];
      double dd = -h[i] / (hj * hj);  // ddelta_i/dh_j
      double dvi = q[i - 1] - y[i - 1];
      g += 2.0 * dvi * du * du * (dA[i] * dd / hj - A[i] / (hj * hj));
      g += du * du * du * (dB[i] * dd / (hj * hj) - 2.0 * B[i] / (hj * hj * hj));
      if (i + 1 <= k + 1) {
        double dT = -(du / (hj * hj)) * phi(delta[i]) + (du / hj) * phi_prime(delta[i]) * dd;
        g += dT * suffix[i + 1];
      }
    }
    grad[j + 1] = g;
  }
  return grad;
}

Quantile LogConcaveFit::quantile() const {
  if (point_mass) {
    StepQuantile s;
    s.part.u = {0.0, 1.0};
    s.y = {atom};
    return s;
  }
  return LogConcaveQuantile{part, c, h, q};
}

namespace {

// Feasible set over the knot values h_0..h_K alone; the translation c is
// eliminated analytically by recentering, so it never enters the projection.
struct Feasibility {
  Eigen::SparseMatrix<double> C;
  Eigen::VectorXd b;
  // row-equilibrated copy for the cached equality system below
  Eigen::SparseMatrix<double> Cs;
  Eigen::VectorXd bs, de;
  // warm-start state for the projection QP
  std::vector<double> warm_x, warm_y;
  std::vector<char> warm_active;
  // Factorization of the active-set equality system for warm_active's rows.
  // Along the descent path most projections pin the same rows as the last
  // one, so a solve against this factorization plus a KKT check replaces the
  // full solver call; any check failure falls back to it.
  std::vector<char> cached_active;
  std::vector<int> cached_rows;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;

  bool feasible(const Eigen::VectorXd& v) const {
    Eigen::VectorXd slack = C * v - b;
    return slack.minCoeff() >= 0.0;
  }
};

constexpr double kCacheDelta = 2e-9;

void build_cache(Feasibility& fs) {
  fs.cached_active = fs.warm_active;
  fs.cached_rows.clear();
  const int m = static_cast<int>(fs.C.rows());
  const int nv = static_cast<int>(fs.C.cols());
  for (int i = 0; i < m; ++i)
    if (fs.warm_active[i]) fs.cached_rows.push_back(i);
  const int na = static_cast<int>(fs.cached_rows.size());
  std::vector<int> slot(m, -1);
  for (int r = 0; r < na; ++r) slot[fs.cached_rows[r]] = r;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nv + na + 2 * fs.Cs.nonZeros());
  for (int i = 0; i < nv; ++i) trip.emplace_back(i, i, 1.0 + kCacheDelta);
  for (int k = 0; k < fs.Cs.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(fs.Cs, k); it; ++it) {
      int r = slot[it.row()];
      if (r < 0) continue;
      trip.emplace_back(nv + r, static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), nv + r, it.value());
    }
  for (int r = 0; r < na; ++r) trip.emplace_back(nv + r, nv + r, -kCacheDelta);
  Eigen::SparseMatrix<double> kkt(nv + na, nv + na);
  kkt.setFromTriplets(trip.begin(), trip.end());

  fs.lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  fs.lu->analyzePattern(kkt);
  fs.lu->factorize(kkt);
  if (fs.lu->info() != Eigen::Success) fs.lu.reset();
}

// Solve the projection against the cached active set and accept only on a
// full KKT certificate; returns false whenever the optimal face moved.
bool try_cached(Feasibility& fs, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  if (!fs.lu || fs.cached_active != fs.warm_active) return false;
  const int nv = static_cast<int>(fs.C.cols());
  const int na = static_cast<int>(fs.cached_rows.size());
  const int m = static_cast<int>(fs.C.rows());

  Eigen::VectorXd rhs(nv + na);
  rhs.head(nv) = v;
  for (int r = 0; r < na; ++r) rhs[nv + r] = fs.bs[fs.cached_rows[r]];
  Eigen::VectorXd sol = fs.lu->solve(rhs);

  const double scale = 1.0 + v.lpNorm<Eigen::Infinity>();
  auto residual = [&](const Eigen::VectorXd& s, Eigen::VectorXd& r) {
    r.resize(nv + na);
    r.head(nv) = v - s.head(nv);
    for (int i = 0; i < na; ++i) r[nv + i] = fs.bs[fs.cached_rows[i]];
    std::vector<int> slot(m, -1);
    for (int i = 0; i < na; ++i) slot[fs.cached_rows[i]] = i;
    for (int k = 0; k < fs.Cs.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(fs.Cs, k); it; ++it) {
        int sl = slot[it.row()];
        if (sl < 0) continue;
        r[it.col()] -= it.value() * s[nv + sl];
        r[nv + sl] -= it.value() * s[it.col()];
      }
    return r.lpNorm<Eigen::Infinity>();
  };
  Eigen::VectorXd r;
  double rn = residual(sol, r);
  for (int pass = 0; pass < 3 && rn > 1e-12 * scale; ++pass) {
    sol += fs.lu->solve(r);
    rn = residual(sol, r);
  }
  if (rn > 1e-11 * scale) return false;

  Eigen::VectorXd x = sol.head(nv);
  Eigen::VectorXd slack = fs.Cs * x - fs.bs;
  if (slack.minCoeff() < -1e-10 * (1.0 + x.lpNorm<Eigen::Infinity>())) return false;
  double lam_max = 0;
  for (int i = 0; i < na; ++i) lam_max = std::max(lam_max, -sol[nv + i]);
  for (int i = 0; i < na; ++i)
    if (-sol[nv + i] < -1e-10 * (1.0 + lam_max)) return false;

  out = x;
  fs.warm_x.assign(x.data(), x.data() + nv);
  fs.warm_y.assign(m, 0.0);
  for (int i = 0; i < na; ++i) {
    int row = fs.cached_rows[i];
    fs.warm_y[row] = std::max(0.0, -sol[nv + i]) * fs.de[row];
  }
  return true;
}

Feasibility make_feasibility(const Partition& part, double eps) {
  const int k = part.cells();
  std::vector<Eigen::Triplet<double>> ct;
  int rows = 0;
  for (int i = 1; i <= k - 1; ++i) {
    // concavity: -du_{i+1} h_{i-1} + (du_i + du_{i+1}) h_i - du_i h_{i+1} >= 0
    double du_i = part.du(i), du_n = part.du(i + 1);
    ct.emplace_back(rows, i - 1, -du_n);
    ct.emplace_back(rows, i, du_i + du_n);
    ct.emplace_back(rows, i + 1, -du_i);
    ++rows;
  }
  const int floor_start = rows;
  for (int j = 0; j <= k; ++j) {
    ct.emplace_back(rows, j, 1.0);
    ++rows;
  }
  Feasibility fs;
  fs.C = Eigen::SparseMatrix<double>(rows, k + 1);
  fs.C.setFromTriplets(ct.begin(), ct.end());
  fs.b = Eigen::VectorXd::Zero(rows);
  for (int j = 0; j <= k; ++j) fs.b[floor_start + j] = eps;

  fs.de = Eigen::VectorXd::Zero(rows);
  for (int kk = 0; kk < fs.C.outerSize(); ++kk)
    for (Eigen::SparseMatrix<double>::InnerIterator it(fs.C, kk); it; ++it)
      fs.de[it.row()] = std::max(fs.de[it.row()], std::abs(it.value()));
  for (int i = 0; i < rows; ++i) fs.de[i] = 1.0 / fs.de[i];
  fs.Cs = fs.de.asDiagonal() * fs.C;
  fs.bs = fs.de.cwiseProduct(fs.b);
  return fs;
}

// Least concave majorant of the knot values: upper hull of (u_j, h_j),
// evaluated back on the knots.  Only ever raises values, so floors survive.
void concave_majorant(const Partition& part, Eigen::VectorXd& h) {
  const int k = part.cells();
  std::vector<int> hull;
  auto cross = [&](int a, int b, int c) {
    return (part.u[b] - part.u[a]) * (h[c] - h[a]) -
           (h[b] - h[a]) * (part.u[c] - part.u[a]);
  };
  for (int j = 0; j <= k; ++j) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), j) >= 0.0)
      hull.pop_back();
    hull.push_back(j);
  }
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    int a = hull[s], b = hull[s + 1];
    double slope = (h[b] - h[a]) / (part.u[b] - part.u[a]);
    for (int j = a + 1; j < b; ++j) h[j] = h[a] + slope * (part.u[j] - part.u[a]);
  }
}

Eigen::VectorXd project_feasible(Feasibility& fs, const Partition& part,
                                 const Eigen::VectorXd& v, double eps,
                                 const SolverConfig& qp_cfg) {
  if (fs.feasible(v)) return v;
  const int k = part.cells();

  Eigen::VectorXd out;
  if (!try_cached(fs, v, out)) {
    QuadraticProgram qp;
    const int nv = static_cast<int>(v.size());
    qp.P = Eigen::SparseMatrix<double>(nv, nv);
    qp.P.setIdentity();
    qp.a = -v;
    qp.C = fs.C;
    qp.b = fs.b;
    SolverConfig cfg = qp_cfg;
    // The majorant repair below guarantees feasibility whatever the solver
    // returns, so a hard cold-start instance is not worth grinding on: the
    // outer descent only needs a usable direction from it.
    cfg.max_iter = std::min(cfg.max_iter, 4000);
    cfg.warm_x = fs.warm_x;
    cfg.warm_y = fs.warm_y;
    // Seed the solver's active set so the direct KKT path can finish before
    // any splitting iterations run.  Consecutive projections pin nearly the
    // same rows, so the previous solve's set is the best guess; on the first
    // call fall back to the majorant of the target, whose affine bridges are
    // the rows the projection is likely to pin.
    if (!fs.warm_active.empty()) {
      cfg.warm_active = fs.warm_active;
    } else {
      Eigen::VectorXd hulled = v.cwiseMax(eps);
      concave_majorant(part, hulled);
      double hscale = std::max(hulled.maxCoeff(), eps);
      std::vector<char> seed(fs.C.rows(), 0);
      for (int i = 1; i <= k - 1; ++i) {
        double du_i = part.du(i), du_n = part.du(i + 1);
        double row = -du_n * hulled[i - 1] + (du_i + du_n) * hulled[i] - du_i * hulled[i + 1];
        if (row <= 1e-12 * (du_i + du_n) * hscale) seed[i - 1] = 1;
      }
      for (int j = 0; j <= k; ++j)
        if (hulled[j] <= eps * (1.0 + 1e-12)) seed[(k - 1) + j] = 1;
      cfg.warm_active = std::move(seed);
    }
    QpSolution sol = solve_qp(qp, cfg);
    fs.warm_x.assign(sol.x.data(), sol.x.data() + sol.x.size());
    fs.warm_y.assign(sol.y.data(), sol.y.data() + sol.y.size());
    out = sol.x;
  }
  out = out.cwiseMax(eps);
  // The solve can leave residual cone violations; repair to exact feasibility
  // (floors, then the concave majorant, which never un-floors anything).
  concave_majorant(part, out);
  // Record which rows the repaired point pins for the next call's seed, and
  // refresh the cached factorization whenever that set moved.
  {
    double hscale = std::max(out.maxCoeff(), eps);
    std::vector<char> seed(fs.C.rows(), 0);
    for (int i = 1; i <= k - 1; ++i) {
      double du_i = part.du(i), du_n = part.du(i + 1);
      double row = -du_n * out[i - 1] + (du_i + du_n) * out[i] - du_i * out[i + 1];
      if (row <= 1e-12 * (du_i + du_n) * hscale) seed[i - 1] = 1;
    }
    for (int j = 0; j <= k; ++j)
      if (out[j] <= eps * (1.0 + 1e-12)) seed[(k - 1) + j] = 1;
    fs.warm_active = std::move(seed);
  }
  if (!fs.lu || fs.cached_active != fs.warm_active) build_cache(fs);
  return out;
}

double step_mean(const Partition& part, const std::vector<double>& y) {
  double m = 0;
  for (int i = 1; i <= part.cells(); ++i) m += y[i - 1] * part.du(i);
  return m;
}

double curve_mean(double c, const std::vector<double>& h, const Partition& part) {
  double m = 0, qprev = c;
  for (int i = 1; i <= part.cells(); ++i) {
    double du = part.du(i);
    double delta = h[i] / h[i - 1] - 1.0;
    m += qprev * du + du * du * phi_moments(delta).a / h[i - 1];
    qprev += (du / h[i - 1]) * phi(delta);
  }
  return m;
}

std::vector<double> initial_h(const Partition& part, const std::vector<double>& y,
                              double range, double eps) {
  const int k = part.cells();
  // Reciprocal of the average slope of the cell values over a moving window.
  // Differencing across the whole window rather than cell by cell keeps the
  // estimate away from the near-zero slopes of locally flat stretches, whose
  // reciprocals would otherwise dominate everything near them. Estimates
  // that come out too large are the dangerous kind: the objective is nearly
  // insensitive to oversized entries, while undersized ones correct quickly.
  int win = std::max(1, k / 8);
  std::vector<double> h(k + 1);
  double fallback = 1.0 / range;  // constant-density scale
  for (int j = 0; j <= k; ++j) {
    int lo = std::max(0, j - win), hi = std::min(k, j + win);
    // Cell values y_i sit at cell midpoints; knot j adjoins cells j and j+1.
    int a = std::max(1, lo), b = std::min(k, hi + 1);
    double width = 0;
    for (int i = a; i < b; ++i) width += 0.5 * (part.du(i) + part.du(i + 1));
    double rise = y[b - 1] - y[a - 1];
    double slope = width > 0 ? rise / width : 0.0;
    h[j] = std::max(slope > 1e-9 * range ? 1.0 / slope : fallback, eps);
  }
  return h;
}

LogConcaveFit point_mass_fit(const Partition& part, const std::vector<double>& y) {
  LogConcaveFit fit;
  fit.part = part;
  fit.point_mass = true;
  fit.atom = step_mean(part, y);
  fit.c = fit.atom;
  double obj = 0;
  for (int i = 1; i <= part.cells(); ++i) {
    double dvi = fit.atom - y[i - 1];
    obj += dvi * dvi * part.du(i);
  }
  fit.w2 = std::sqrt(obj);
  fit.report.status = SolveStatus::Optimal;
  fit.report.objective = obj;
  return fit;
}

}  // namespace

LogConcaveFit fit_logconcave(const StepQuantile& q0, const LogConcaveConfig& cfg) {
  const Partition& part = q0.part;
  const std::vector<double>& y = q0.y;
  const int k = part.cells();

  const double lo = y.front(), hi = y.back();
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) return point_mass_fit(part, y);

  const double range = hi - lo;
  const double eps = 1e-8 / range;
  Feasibility fs = make_feasibility(part, eps);
  const double data_mean = step_mean(part, y);

  // Variables are the knot values h_0..h_K; the translation is recentered
  // away: mean(Q_{c,h}) is c plus a function of h alone, so the slice optimum
  // c(h) pins the fitted mean to the data mean (clamped when the support is
  // restricted to the half line).
  auto center = [&](const std::vector<double>& hh) {
    double c = data_mean - curve_mean(0.0, hh, part);
    if (cfg.nonneg_support && c < 0.0) c = 0.0;
    return c;
  };
  auto unpack_h = [&](const Eigen::VectorXd& vv) {
    return std::vector<double>(vv.data(), vv.data() + k + 1);
  };
  auto fval = [&](const Eigen::VectorXd& vv) {
    std::vector<double> hh = unpack_h(vv);
    return logconcave_objective(center(hh), hh, part, y);
  };
  auto gval = [&](const Eigen::VectorXd& vv) {
    std::vector<double> hh = unpack_h(vv);
    std::vector<double> g = logconcave_gradient(center(hh), hh, part, y);
    return Eigen::Map<Eigen::VectorXd>(g.data() + 1, k + 1).eval();
  };

  Eigen::VectorXd v(k + 1);
  std::vector<double> h0 = initial_h(part, y, range, eps);
  for (int j = 0; j <= k; ++j) v[j] = h0[j];
  // Hull first: the slope estimates are noisy and far from concave, and the
  // majorant gives a feasible start without a cold projection solve.
  concave_majorant(part, v);
  v = project_feasible(fs, part, v, eps, cfg.qp);

  double f = fval(v);
  Eigen::VectorXd g = gval(v);
  double t = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd v_prev = v, g_prev = g;
  bool have_prev = false;

  // Memory of recent objective values for the nonmonotone acceptance test;
  // spectral steps routinely overshoot on single iterations and a monotone
  // rule would truncate them into a slow crawl.
  std::vector<double> recent(10, f);
  int recent_pos = 0;

  int iter = 0;
  bool converged = false;
  double stat_bound = std::numeric_limits<double>::infinity();

  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    if (have_prev) {
      Eigen::VectorXd s = v - v_prev, dg = g - g_prev;
      double sy = s.dot(dg);
      if (sy > 1e-30) {
        // Alternate the two spectral step lengths; the long form alone tends
        // to thrash when curvatures spread across coordinates.
        double step = (iter % 2 == 0) ? s.dot(s) / sy : sy / dg.dot(dg);
        t = std::clamp(step, 1e-12, 1e12);
      }
    }
    v_prev = v;
    g_prev = g;

    Eigen::VectorXd w, dvec;
    double gd = 0;
    bool usable = false;
    bool probed_unit = false;
    for (int attempt = 0; attempt < 32; ++attempt) {
      w = project_feasible(fs, part, v - t * g, eps, cfg.qp);
      dvec = w - v;
      gd = g.dot(dvec);
      // |proj(v - t g) - v| / t is non-increasing in t and bounds the
      // projected-gradient norm at t = 1 from above for t <= 1, so a small
      // value certifies stationarity without a second projection.
      stat_bound = dvec.norm() / std::min(1.0, t);
      if (stat_bound <= cfg.grad_tol * (1.0 + std::abs(f))) {
        converged = true;
        break;
      }
      // Away from t = 1 the certificate above is only an upper bound on the
      // canonical projected-gradient norm, and with the short steps the
      // curvature forces late in a run it can sit well above it.  Once the
      // bound is within shouting distance of the tolerance, re-measure at
      // t = 1 where the bound is exact before concluding anything.
      if (!probed_unit && t != 1.0 &&
          stat_bound <= 50 * cfg.grad_tol * (1.0 + std::abs(f))) {
        probed_unit = true;
        t = 1.0;
        continue;
      }
      if (gd < -1e-18 * (1.0 + std::abs(f))) {
        usable = true;
        break;
      }
      if (t <= 4e-12) {
        // Shrinking has hit the accuracy floor of the projections.  Probe the
        // unit step once: there the certificate equals the canonical
        // projected-gradient norm, and the projection inequality
        // g'(w - v) <= -|w - v|^2 / t guarantees usable descent whenever the
        // certificate fails, so this either converges or makes progress.
        if (probed_unit) break;
        probed_unit = true;
        t = 1.0;
        continue;
      }
      t = std::max(0.25 * t, 1e-12);
    }
    if (converged || !usable) break;

    double f_ref = *std::max_element(recent.begin(), recent.end());
    double beta = 1.0;
    double f_new = 0;
    bool accepted = false;
    while (beta > 1e-16) {
      f_new = fval(v + beta * dvec);
      // The epsilon term keeps rounding noise in f from rejecting the tiny
      // true decreases available near the optimum.
      if (f_new <= f_ref + 1e-4 * beta * gd + 1e-16 * (1.0 + std::abs(f))) {
        accepted = true;
        break;
      }
      beta *= 0.5;
    }
    if (!accepted) break;
    v += beta * dvec;

    f = f_new;
    g = gval(v);
    have_prev = true;
    recent[recent_pos] = f;
    recent_pos = (recent_pos + 1) % static_cast<int>(recent.size());
  }

  LogConcaveFit fit;
  fit.part = part;
  fit.h = unpack_h(v);
  fit.c = center(fit.h);
  fit.q = q_knots(fit.c, fit.h, part);
  fit.w2 = std::sqrt(std::max(0.0, f));
  fit.report.iterations = std::min(iter, cfg.max_iter);
  Eigen::VectorXd slack = fs.C * v - fs.b;
  fit.report.primal_residual = std::max(0.0, -slack.minCoeff());
  fit.report.dual_residual = stat_bound;
  fit.report.objective = f;
  fit.report.status = converged ? SolveStatus::Optimal : SolveStatus::MaxIter;
  return fit;
}

LogConcaveFit fit_logconcave(const EmpiricalMeasure& m, int k, const LogConcaveConfig& cfg) {
  if (m.size() == 1 ||
      m.x.back() - m.x.front() <= 1e-12 * std::max(1.0, std::abs(m.x.back()))) {
    LogConcaveFit fit;
    fit.part.u = {0.0, 1.0};
    fit.point_mass = true;
    double mean = 0;
    for (int i = 0; i < m.size(); ++i) mean += m.w[i] * m.x[i];
    fit.atom = mean;
    fit.c = mean;
    double obj = 0;
    for (int i = 0; i < m.size(); ++i) obj += m.w[i] * (m.x[i] - mean) * (m.x[i] - mean);
    fit.w2 = std::sqrt(obj);
    fit.report.status = SolveStatus::Optimal;
    fit.report.objective = obj;
    return fit;
  }
  if (k <= 0) k = std::max(64, m.size());
  return fit_logconcave(discretize(m, k), cfg);
}

DensityModel logconcave_density(const LogConcaveFit& fit) {
  if (fit.point_mass) throw input_error("point-mass fit has no density");
  const int k = fit.part.cells();
  DensityModel d;
  d.support_lo = fit.q[0];
  d.support_hi = fit.q[k];
  d.segments.reserve(k);
  for (int i = 1; i <= k; ++i) {
    // log-slope beta_i = h_{i-1} delta_i / du_i = (h_i - h_{i-1}) / du_i;
    // continuity f(q_i-) = h_i follows from beta dq = log(1 + delta).
    double beta = (fit.h[i] - fit.h[i - 1]) / fit.part.du(i);
    d.segments.push_back({fit.q[i - 1], fit.q[i], fit.h[i - 1], beta});
  }
  return d;
}

}  // namespace wproj
