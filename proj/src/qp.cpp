#include "wproj/qp.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>

#include "wproj/errors.hpp"

namespace wproj {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double max_abs(const SpMat& m) {
  double v = 0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

void check_problem(const QuadraticProgram& qp) {
  const auto n = qp.P.rows();
  if (qp.P.cols() != n || qp.a.size() != n)
    throw std::invalid_argument("solve_qp: dimension mismatch between P and a");
  if (qp.C.rows() > 0 && (qp.C.cols() != n || qp.b.size() != qp.C.rows()))
    throw std::invalid_argument("solve_qp: dimension mismatch between C and b");
  SpMat diff = SpMat(qp.P.transpose()) - qp.P;
  if (max_abs(diff) > 1e-12 * (1.0 + max_abs(qp.P)))
    throw std::invalid_argument("solve_qp: P is not symmetric");
}

struct Residuals {
  double prim = 0;
  double dual = 0;
  double comp = 0;

  double worst() const { return std::max(prim, std::max(dual, comp)); }
};

Residuals kkt_residuals(const QuadraticProgram& qp, const Vec& x, const Vec& lam) {
  Residuals r;
  Vec station = qp.P * x + qp.a;
  if (qp.C.rows() > 0) {
    Vec slack = qp.C * x - qp.b;
    station -= qp.C.transpose() * lam;
    for (int i = 0; i < slack.size(); ++i) {
      r.prim = std::max(r.prim, -slack[i]);
      r.comp = std::max(r.comp, std::abs(lam[i] * slack[i]));
    }
  }
  r.dual = station.lpNorm<Eigen::Infinity>();
  return r;
}

double objective_of(const QuadraticProgram& qp, const Vec& x) {
  return 0.5 * x.dot(qp.P * x) + qp.a.dot(x);
}


// Minimizer on the affine set {Cs_rows x = bs_rows}: saddle KKT system with a
// small regularization shift, refined against the shift-free system.  nu holds
// the equilibrated multipliers (P x + a = Cs' nu) with zeros off the rows.
class WorkingSetSolver {
 public:
  WorkingSetSolver(const QuadraticProgram& qp, const SpMat& Cs, const Vec& bs)
      : qp_(qp), Cs_(Cs), bs_(bs), delta_(1e-9 * (1.0 + max_abs(qp.P))) {}

  bool solve(const std::vector<int>& rows, Vec& x, Vec& nu) const {
    const int n = static_cast<int>(qp_.P.rows());
    const int m = static_cast<int>(Cs_.rows());
    const int na = static_cast<int>(rows.size());

    SpMat kkt(n + na, n + na);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(qp_.P.nonZeros() + 2 * Cs_.nonZeros() + n + na);
    for (int k = 0; k < qp_.P.outerSize(); ++k)
      for (SpMat::InnerIterator it(qp_.P, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, delta_);
    // Cs is column-major: walk all nonzeros once and keep the active rows.
    std::vector<int> row_slot(m, -1);
    for (int r = 0; r < na; ++r) row_slot[rows[r]] = r;
    for (int k = 0; k < Cs_.outerSize(); ++k)
      for (SpMat::InnerIterator it(Cs_, k); it; ++it) {
        int slot = row_slot[it.row()];
        if (slot < 0) continue;
        trip.emplace_back(n + slot, static_cast<int>(it.col()), it.value());
        trip.emplace_back(static_cast<int>(it.col()), n + slot, it.value());
      }
    for (int r = 0; r < na; ++r) trip.emplace_back(n + r, n + r, -delta_);
    kkt.setFromTriplets(trip.begin(), trip.end());

    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(kkt);
    lu.factorize(kkt);
    if (lu.info() != Eigen::Success) return false;

    Vec rhs(n + na);
    rhs.head(n) = -qp_.a;
    for (int r = 0; r < na; ++r) rhs[n + r] = bs_[rows[r]];
    Vec sol = lu.solve(rhs);

    double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 6; ++it) {
      Vec resid(n + na);
      Vec xr = sol.head(n);
      Vec nur = sol.tail(na);
      resid.head(n) = -qp_.a - qp_.P * xr;
      for (int r = 0; r < na; ++r) resid[n + r] = bs_[rows[r]];
      // subtract C_A' nu from the top block and C_A x from the bottom
      std::vector<double> bot(na, 0.0);
      for (int k = 0; k < Cs_.outerSize(); ++k)
        for (SpMat::InnerIterator ci(Cs_, k); ci; ++ci) {
          int slot = row_slot[ci.row()];
          if (slot < 0) continue;
          resid[ci.col()] -= ci.value() * nur[slot];
          bot[slot] += ci.value() * xr[ci.col()];
        }
      for (int r = 0; r < na; ++r) resid[n + r] -= bot[r];
      if (resid.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) break;
      sol += lu.solve(resid);
    }

    x = sol.head(n);
    nu = Vec::Zero(m);
    for (int r = 0; r < na; ++r) nu[rows[r]] = -sol[n + r];
    return true;
  }

 private:
  const QuadraticProgram& qp_;
  const SpMat& Cs_;
  const Vec& bs_;
  double delta_;
};

// Primal active-set descent from a feasible point.  Each pivot solves the
// working-set equality system and either walks to the nearest blocking row
// (add) or takes the full step and removes the most negative multiplier
// (drop).  The objective is monotone along the way, so unlike bulk flipping
// this cannot cycle; the pivot cap only guards numerical stalemates.
bool primal_active_set(const QuadraticProgram& qp, const SpMat& Cs, const Vec& bs,
                       const Vec& d, const SolverConfig& cfg, Vec& x, Vec& lam,
                       Residuals& res, std::vector<char> active) {
  const int m = static_cast<int>(Cs.rows());
  WorkingSetSolver ws(qp, Cs, bs);
  Vec xstar, nu;

  const int max_pivots = 2 * m + 200;
  int zero_steps = 0;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    std::vector<int> rows;
    rows.reserve(m);
    for (int i = 0; i < m; ++i)
      if (active[i]) rows.push_back(i);
    if (!ws.solve(rows, xstar, nu)) return false;

    Vec step = xstar - x;
    double step_inf = step.lpNorm<Eigen::Infinity>();

    int blocker = -1;
    double alpha = 1.0;
    if (step_inf > 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      Vec csd = Cs * step;
      Vec sd = Cs * x - bs;
      for (int i = 0; i < m; ++i) {
        if (active[i] || csd[i] >= -1e-12 * step_inf) continue;
        double ratio = std::max(sd[i], 0.0) / (-csd[i]);
        if (ratio < alpha) {
          alpha = ratio;
          blocker = i;
        }
      }
    }
    if (blocker >= 0) {
      x += alpha * step;
      active[blocker] = 1;
      // long runs of degenerate (zero-step) additions mean ties are being
      // resolved by rounding noise; give up rather than risk a cycle
      zero_steps = alpha <= 1e-12 ? zero_steps + 1 : 0;
      if (zero_steps > 100) return false;
      continue;
    }

    x = xstar;
    double drop_tol = 1e-11 * (1.0 + nu.lpNorm<Eigen::Infinity>());
    int worst = -1;
    double worst_val = -drop_tol;
    for (int r : rows)
      if (nu[r] < worst_val) {
        worst_val = nu[r];
        worst = r;
      }
    if (worst >= 0) {
      active[worst] = 0;
      continue;
    }

    lam = Vec::Zero(m);
    for (int r : rows) lam[r] = std::max(0.0, nu[r] * d[r]);
    res = kkt_residuals(qp, x, lam);
    if (getenv("QP_DEBUG"))
      fprintf(stderr, "[qpas] pivots %d na %d prim %.2e dual %.2e comp %.2e\n", pivot,
              static_cast<int>(rows.size()), res.prim, res.dual, res.comp);
    return res.worst() <= cfg.tol;
  }
  if (getenv("QP_DEBUG")) fprintf(stderr, "[qpas] pivot cap hit (m=%d)\n", m);
  return false;
}

// Repair a guessed active set: equality-solve, drop negative multipliers,
// add violated rows, re-solve.  The bulk rounds correct hundreds of rows per
// factorization and converge fast when the guess is near the truth; the
// single-exchange rounds afterwards settle stragglers.  Returns false once
// the budget runs out or the set stops changing without passing KKT.
bool repair_active_set(const QuadraticProgram& qp, const SpMat& Cs, const Vec& bs,
                       const Vec& d, const SolverConfig& cfg, Vec& x, Vec& lam,
                       Residuals& res, std::vector<char> active, int rounds) {
  const int m = static_cast<int>(Cs.rows());
  WorkingSetSolver ws(qp, Cs, bs);
  Vec xp, nu;
  for (int round = 0; round < rounds; ++round) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
      if (active[i]) rows.push_back(i);
    const int na = static_cast<int>(rows.size());
    if (!ws.solve(rows, xp, nu)) return false;

    // Work in the equilibrated quantities so one threshold fits every row:
    // nu are the multipliers of Cs, sd the slacks of Cs x >= bs.
    Vec sd = Cs * xp - bs;
    double nu_scale = 1.0 + nu.lpNorm<Eigen::Infinity>();
    double x_scale = 1.0 + xp.lpNorm<Eigen::Infinity>();

    // Accept the first iterate whose clamped multipliers satisfy the KKT
    // system; waiting for the active set to stop moving would never test
    // anything on degenerate problems, where ties flip forever.
    {
      Vec lam_full = Vec::Zero(m);
      for (int r : rows) lam_full[r] = std::max(0.0, nu[r] * d[r]);
      Residuals pr = kkt_residuals(qp, xp, lam_full);
      if (getenv("QP_DEBUG"))
        fprintf(stderr, "[qpp] round %d na %d prim %.2e dual %.2e comp %.2e\n", round, na,
                pr.prim, pr.dual, pr.comp);
      if (pr.worst() <= cfg.tol) {
        x = xp;
        lam = lam_full;
        res = pr;
        return true;
      }
    }

    bool changed = false;
    if (round < 25) {
      // Bulk phase: flip everything that looks wrong at once.
      for (int r : rows)
        if (nu[r] < -1e-9 * nu_scale) {
          active[r] = 0;
          changed = true;
        }
      for (int i = 0; i < m; ++i)
        if (!active[i] && sd[i] < -1e-11 * x_scale) {
          active[i] = 1;
          changed = true;
        }
    } else {
      // Exchange phase: one row per round, worst offender first, dual drops
      // before primal adds.
      int worst = -1;
      double worst_val = -1e-9 * nu_scale;
      for (int r : rows)
        if (nu[r] < worst_val) {
          worst_val = nu[r];
          worst = r;
        }
      if (worst >= 0) {
        active[worst] = 0;
        changed = true;
      } else {
        worst_val = -1e-11 * x_scale;
        for (int i = 0; i < m; ++i)
          if (!active[i] && sd[i] < worst_val) {
            worst_val = sd[i];
            worst = i;
          }
        if (worst >= 0) {
          active[worst] = 1;
          changed = true;
        }
      }
    }
    if (!changed) return false;
  }
  return false;
}

// Polish toward exact KKT satisfaction from whatever active-set knowledge is
// available.  With a caller-supplied seed the cheap bulk repair runs first;
// if that churns without settling (the failure mode of guesses that are off
// by a lot) and the caller's start point is feasible, the exact active-set
// descent takes over from it.  Unseeded calls come from ADMM estimates near
// convergence, where repair alone is the right tool.
bool polish(const QuadraticProgram& qp, const SpMat& Cs, const Vec& bs, const Vec& d,
            const SolverConfig& cfg, Vec& x, Vec& lam, Residuals& res,
            const std::vector<char>* seed = nullptr) {
  const int m = static_cast<int>(Cs.rows());
  if (seed) {
    Vec x0 = x;
    Vec xp = x;
    Vec lamp = lam;
    Residuals rp;
    if (repair_active_set(qp, Cs, bs, d, cfg, xp, lamp, rp, *seed, 8)) {
      x = xp;
      lam = lamp;
      res = rp;
      return true;
    }
    Vec sd = Cs * x0 - bs;
    double x_inf = x0.lpNorm<Eigen::Infinity>();
    if (sd.minCoeff() >= -1e-10 * (1.0 + x_inf)) {
      // Working set must be a subset of the rows active at the start point.
      std::vector<char> active(m, 0);
      for (int i = 0; i < m; ++i)
        active[i] = (*seed)[i] && sd[i] <= 1e-8 * (1.0 + x_inf);
      x = x0;
      return primal_active_set(qp, Cs, bs, d, cfg, x, lam, res, std::move(active));
    }
    return false;
  }
  std::vector<char> active(m, 0);
  Vec slack = qp.C * x - qp.b;
  for (int i = 0; i < m; ++i)
    active[i] = (slack[i] < 1e-9 * (1.0 + std::abs(qp.b[i]))) || (lam[i] > slack[i]);
  return repair_active_set(qp, Cs, bs, d, cfg, x, lam, res, std::move(active), 60);
}

}  // namespace

QpSolution solve_qp(const QuadraticProgram& qp, const SolverConfig& cfg) {
  check_problem(qp);
  const int n = static_cast<int>(qp.P.rows());
  const int m = static_cast<int>(qp.C.rows());

  QpSolution out;
  out.x = Vec::Zero(n);
  out.y = Vec::Zero(m);

  if (m == 0) {
    SpMat ridge(n, n);
    ridge.setIdentity();
    ridge *= 1e-12 * (1.0 + max_abs(qp.P));
    Eigen::SimplicialLDLT<SpMat> ldlt(SpMat(qp.P + ridge));
    if (ldlt.info() != Eigen::Success)
      throw std::invalid_argument("solve_qp: P is not positive semidefinite");
    out.x = ldlt.solve(-qp.a);
    Residuals r = kkt_residuals(qp, out.x, out.y);
    out.report.iterations = 1;
    out.report.primal_residual = r.prim;
    out.report.dual_residual = std::max(r.dual, r.comp);
    out.report.objective = objective_of(qp, out.x);
    out.report.status = r.worst() <= cfg.tol ? SolveStatus::Optimal : SolveStatus::MaxIter;
    return out;
  }

  // Row equilibration of C; b and the multipliers scale along.
  Vec d = Vec::Zero(m);
  for (int k = 0; k < qp.C.outerSize(); ++k)
    for (SpMat::InnerIterator it(qp.C, k); it; ++it)
      d[it.row()] = std::max(d[it.row()], std::abs(it.value()));
  for (int i = 0; i < m; ++i) d[i] = d[i] > 0 ? 1.0 / d[i] : 1.0;
  SpMat Cs = d.asDiagonal() * qp.C;
  Vec bs = d.cwiseProduct(qp.b);

  const double sigma = cfg.sigma;
  const double alpha = cfg.alpha;
  double rho = cfg.rho0;

  SpMat eye(n, n);
  eye.setIdentity();
  SpMat CsT = Cs.transpose();
  auto factorize = [&](double r) {
    SpMat M = qp.P + sigma * eye + r * (CsT * Cs);
    auto f = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(M);
    return f;
  };
  auto ldlt = factorize(rho);
  if (ldlt->info() != Eigen::Success)
    throw std::invalid_argument("solve_qp: P is not positive semidefinite");

  Vec x = Vec::Zero(n), z = Vec::Zero(m), y = Vec::Zero(m);
  if (!cfg.warm_x.empty()) {
    if (static_cast<int>(cfg.warm_x.size()) != n)
      throw std::invalid_argument("solve_qp: warm_x has wrong length");
    x = Eigen::Map<const Vec>(cfg.warm_x.data(), n);
  }
  z = Cs * x;
  if (!cfg.warm_y.empty()) {
    if (static_cast<int>(cfg.warm_y.size()) != m)
      throw std::invalid_argument("solve_qp: warm_y has wrong length");
    for (int i = 0; i < m; ++i) y[i] = -cfg.warm_y[i] / d[i];
  }

  auto lam_of = [&](const Vec& yi) {
    Vec lam = Vec::Zero(m);
    for (int i = 0; i < m; ++i) lam[i] = std::max(0.0, -yi[i] * d[i]);
    return lam;
  };

  Vec y_window = y;
  Residuals res;
  int iter = 0;
  const int check_every = 25;
  SolveStatus status = SolveStatus::MaxIter;
  int polish_skip = 0, polish_fails = 0;

  if (cfg.polish && static_cast<int>(cfg.warm_active.size()) == m) {
    Vec xp = x, lamp = lam_of(y);
    Residuals rp;
    if (polish(qp, Cs, bs, d, cfg, xp, lamp, rp, &cfg.warm_active)) {
      out.x = xp;
      out.y = lamp;
      out.report.iterations = 0;
      out.report.primal_residual = rp.prim;
      out.report.dual_residual = std::max(rp.dual, rp.comp);
      out.report.objective = objective_of(qp, xp);
      out.report.status = SolveStatus::Optimal;
      return out;
    }
  }

  auto try_finish = [&](bool force_plain) -> bool {
    Vec lam = lam_of(y);
    res = kkt_residuals(qp, x, lam);
    if (res.worst() <= cfg.tol) {
      out.y = lam;
      status = SolveStatus::Optimal;
      return true;
    }
    // complementarity scales with the multipliers, so gate the polish
    // attempt relative to their size and back off after failures
    double lam_inf = lam.lpNorm<Eigen::Infinity>();
    if (cfg.polish && res.worst() <= 1e-4 * (1.0 + lam_inf)) {
      if (polish_skip > 0) {
        --polish_skip;
      } else {
        Vec xp = x, lamp = lam;
        Residuals rp = res;
        if (polish(qp, Cs, bs, d, cfg, xp, lamp, rp)) {
          x = xp;
          out.y = lamp;
          res = rp;
          status = SolveStatus::Optimal;
          return true;
        }
        polish_fails = std::min(polish_fails + 1, 6);
        polish_skip = 1 << polish_fails;
      }
    }
    if (force_plain) out.y = lam;
    return false;
  };

  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    Vec rhs = sigma * x - qp.a + CsT * (rho * z - y);
    Vec xt = ldlt->solve(rhs);
    Vec zt = Cs * xt;
    x = alpha * xt + (1.0 - alpha) * x;
    Vec za = alpha * zt + (1.0 - alpha) * z;
    Vec w = za + y / rho;
    Vec z_next = w.cwiseMax(bs);
    y += rho * (za - z_next);
    z = z_next;

    if (iter % check_every == 0) {
      if (try_finish(false)) break;

      // Primal infeasibility certificate from the drift of y: a direction
      // v <= 0 with C'v = 0 and b'v < 0 proves Cx >= b empty (Farkas).
      Vec dy = y - y_window;
      y_window = y;
      double ndy = dy.lpNorm<Eigen::Infinity>();
      if (ndy > 1e-12) {
        double mx = dy.maxCoeff();
        double ct = (CsT * dy).lpNorm<Eigen::Infinity>();
        double bd = bs.dot(dy);
        if (mx <= 1e-8 * ndy && ct <= 1e-8 * ndy &&
            bd < -1e-8 * ndy * std::max(1.0, bs.lpNorm<Eigen::Infinity>())) {
          status = SolveStatus::Infeasible;
          out.y = lam_of(y);
          res = kkt_residuals(qp, x, out.y);
          break;
        }
      }

      if (iter % (2 * check_every) == 0) {
        // OSQP-style penalty balancing between scaled residual norms; the
        // primal side is the consensus gap Cx - z, not the violation.
        Vec cx = Cs * x;
        double rp = (cx - z).lpNorm<Eigen::Infinity>() /
                    std::max({cx.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>(), 1e-6});
        Vec lam = lam_of(y);
        Vec grad = qp.P * x + qp.a;
        Vec ct = qp.C.transpose() * lam;
        double rd = (grad - ct).lpNorm<Eigen::Infinity>() /
                    std::max({grad.lpNorm<Eigen::Infinity>(), ct.lpNorm<Eigen::Infinity>(), 1e-6});
        double raw = std::max(rp, 1e-14) / std::max(rd, 1e-14);
        if (raw > 5.0 || raw < 0.2) {
          double rho_new = std::clamp(rho * std::sqrt(raw), 1e-6, 1e6);
          if (rho_new != rho) {
            rho = rho_new;
            ldlt = factorize(rho);
          }
        }
      }
    }
  }

  if (status == SolveStatus::MaxIter) try_finish(true);
  if (out.y.size() == 0 || (status == SolveStatus::MaxIter && out.y.lpNorm<Eigen::Infinity>() == 0))
    out.y = lam_of(y);

  out.x = x;
  out.report.iterations = std::min(iter, cfg.max_iter);
  out.report.primal_residual = res.prim;
  out.report.dual_residual = std::max(res.dual, res.comp);
  out.report.objective = objective_of(qp, x);
  out.report.status = status;
  return out;
}

}  // namespace wproj
