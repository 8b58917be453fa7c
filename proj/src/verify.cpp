#include "wproj/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "wproj/errors.hpp"
#include "wproj/phi.hpp"
#include "wproj/transport.hpp"

namespace wproj {

namespace {

// 4-point Gauss-Legendre nodes/weights on [-1, 1]; exact through degree 7,
// which covers every polynomial integrand below and leaves quadrature error
// far under the certificate tolerance for the smooth ones.
constexpr double kGN[2] = {0.3399810435848563, 0.8611363115940526};
constexpr double kGW[2] = {0.6521451548625461, 0.3478548451374538};

void check_same_grid(const Partition& a, const Partition& b) {
  bool ok = a.u.size() == b.u.size();
  if (ok)
    for (size_t i = 0; i < a.u.size(); ++i)
      if (std::abs(a.u[i] - b.u[i]) > 1e-12) ok = false;
  if (!ok) throw input_error("first_order_residual: fit and data must share one grid");
}

// integral over (0,1) of (qhat(u) - step data) * gen(u), cell by cell;
// callables receive (u, cell index)
template <class QF, class GF>
double residual_inner(const Partition& part, const std::vector<double>& y, QF&& qhat,
                      GF&& gen) {
  double acc = 0;
  for (int i = 1; i <= part.cells(); ++i) {
    double a = part.u[i - 1], b = part.u[i];
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int s = 0; s < 2; ++s)
      for (double sign : {-1.0, 1.0}) {
        double u = mid + sign * half * kGN[s];
        acc += half * kGW[s] * (qhat(u, i) - y[i - 1]) * gen(u, i);
      }
  }
  return acc;
}

template <class GF>
double gen_norm(const Partition& part, GF&& gen) {
  double acc = 0;
  for (int i = 1; i <= part.cells(); ++i) {
    double a = part.u[i - 1], b = part.u[i];
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int s = 0; s < 2; ++s)
      for (double sign : {-1.0, 1.0}) {
        double u = mid + sign * half * kGN[s];
        double g = gen(u, i);
        acc += half * kGW[s] * g * g;
      }
  }
  return std::sqrt(acc);
}

}  // namespace

double first_order_residual(const MonotoneFit& fit, const StepQuantile& data) {
  check_same_grid(fit.part, data.part);
  const Partition& part = fit.part;
  const int k = part.cells();
  auto qhat = [&](double u, int i) {
    double du = part.du(i);
    return fit.q[i - 1] + (fit.q[i] - fit.q[i - 1]) * (u - part.u[i - 1]) / du;
  };

  double best = std::numeric_limits<double>::infinity();
  // Extreme rays of the cone on this grid: a unit-slope ramp starting at each
  // knot except the last.  Every feasible quantile is a nonnegative
  // combination of these, so checking them checks the whole cone.
  for (int j = 0; j <= k - 1; ++j) {
    double uj = part.u[j];
    double norm = std::sqrt((1.0 - uj) * (1.0 - uj) * (1.0 - uj) / 3.0);
    if (norm <= 1e-14) continue;
    auto ramp = [&](double u, int) { return std::max(u - uj, 0.0); };
    best = std::min(best, residual_inner(part, data.y, qhat, ramp) / norm);
  }
  // The fit direction itself, both signs: at the projection the residual is
  // orthogonal to the fit.
  double qn2 = 0;
  for (int i = 1; i <= k; ++i) {
    double a = fit.q[i - 1], b = fit.q[i];
    qn2 += part.du(i) * (a * a + a * b + b * b) / 3.0;
  }
  if (qn2 > 1e-28) {
    double ip = residual_inner(part, data.y, qhat, qhat);
    double nq = std::sqrt(qn2);
    best = std::min({best, ip / nq, -ip / nq});
  }
  return best;
}

double first_order_residual(const LogConcaveFit& fit, const StepQuantile& data) {
  if (fit.point_mass)
    throw input_error("first_order_residual: point-mass fit has no tangent directions");
  check_same_grid(fit.part, data.part);
  const Partition& part = fit.part;
  const int k = part.cells();
  const std::vector<double>& h = fit.h;
  const std::vector<double>& q = fit.q;

  std::vector<double> delta(k + 1);
  for (int i = 1; i <= k; ++i) delta[i] = h[i] / h[i - 1] - 1.0;

  auto qhat = [&](double u, int i) {
    double du = part.du(i), s = u - part.u[i - 1];
    return q[i - 1] + (s / h[i - 1]) * phi(delta[i] * s / du);
  };

  double best = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (double v : q) scale = std::max(scale, std::abs(v));

  // translation: c is free in both directions
  {
    double ip = residual_inner(part, data.y, qhat, [](double, int) { return 1.0; });
    best = std::min({best, ip, -ip});
  }
  // dilation about the mean: scales h uniformly, feasible both ways
  {
    double mean = 0;
    for (int i = 1; i <= k; ++i) {
      double du = part.du(i);
      mean += q[i - 1] * du + du * du * phi_moments(delta[i]).a / h[i - 1];
    }
    auto gen = [&](double u, int i) { return qhat(u, i) - mean; };
    double norm = gen_norm(part, gen);
    if (norm > 1e-14 * scale) {
      double ip = residual_inner(part, data.y, qhat, gen);
      best = std::min({best, ip / norm, -ip / norm});
    }
  }

  // Per-knot reciprocal-slope perturbations.  A sign is admissible when every
  // concavity row that is active at the fit keeps a nonnegative slack
  // derivative along it.
  double hmax = 1.0;
  for (double v : h) hmax = std::max(hmax, std::abs(v));
  std::vector<bool> active(k, false);  // rows r = 1..k-1
  for (int r = 1; r <= k - 1; ++r) {
    double du_r = part.du(r), du_n = part.du(r + 1);
    double slack = -du_n * h[r - 1] + (du_r + du_n) * h[r] - du_r * h[r + 1];
    active[r] = slack <= 1e-6 * (du_r + du_n) * hmax;
  }
  auto row_coef = [&](int r, int j) {
    double du_r = part.du(r), du_n = part.du(r + 1);
    if (j == r - 1) return -du_n;
    if (j == r) return du_r + du_n;
    if (j == r + 1) return -du_r;
    return 0.0;
  };

  std::vector<double> t(k + 1);
  for (int j = 0; j <= k; ++j) {
    // knot sensitivities dq_m/dh_j through the recursion
    t[0] = 0.0;
    for (int m = 1; m <= k; ++m) {
      double du = part.du(m), hm = h[m - 1];
      double d = 0;
      if (j == m - 1)
        d = -(du / (hm * hm)) * phi(delta[m]) +
            (du / hm) * phi_prime(delta[m]) * (-h[m] / (hm * hm));
      else if (j == m)
        d = du * phi_prime(delta[m]) / (hm * hm);
      t[m] = t[m - 1] + d;
    }
    auto gen = [&](double u, int i) {
      double du = part.du(i), s = u - part.u[i - 1];
      double hm = h[i - 1], eta = delta[i] * s / du;
      double g = t[i - 1];
      if (j == i - 1)
        g += -(s / (hm * hm)) * phi(eta) + (s / hm) * phi_prime(eta) * (s / du) * (-h[i] / (hm * hm));
      else if (j == i)
        g += s * s * phi_prime(eta) / (du * hm * hm);
      return g;
    };
    double norm = gen_norm(part, gen);
    if (norm <= 1e-14 * scale) continue;
    double ip = residual_inner(part, data.y, qhat, gen);
    for (double sign : {1.0, -1.0}) {
      bool ok = true;
      for (int r = std::max(1, j - 1); r <= std::min(k - 1, j + 1) && ok; ++r)
        if (active[r] && sign * row_coef(r, j) < 0.0) ok = false;
      if (ok) best = std::min(best, sign * ip / norm);
    }
  }
  return best;
}

double nonexpansiveness_gap(const EmpiricalMeasure& ma, const EmpiricalMeasure& mb,
                            Model model, int k) {
  StepQuantile qa = discretize(ma, k);
  StepQuantile qb = discretize(mb, k);
  Partition shared = merge_partitions(qa.part, qb.part);
  StepQuantile da = discretize_on(ma, shared);
  StepQuantile db = discretize_on(mb, shared);
  double d0 = wp_distance(Quantile(da), Quantile(db), 2.0);
  Quantile fa, fb;
  if (model == Model::Monotone) {
    fa = fit_monotone(da).quantile();
    fb = fit_monotone(db).quantile();
  } else {
    fa = fit_logconcave(da).quantile();
    fb = fit_logconcave(db).quantile();
  }
  return d0 - wp_distance(fa, fb, 2.0);
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double sorted_quantile(const std::vector<double>& v, double p) {
  double pos = p * (static_cast<double>(v.size()) - 1.0);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

}  // namespace

ConsistencyReport consistency_experiment(const TruthSpec& truth,
                                         const std::vector<int>& ns, int reps,
                                         Model model, int k, std::uint64_t seed,
                                         int max_iter) {
  if (ns.empty() || reps <= 0)
    throw input_error("consistency_experiment: need sample sizes and positive reps");
  AnalyticQuantile tq = truth_as_quantile(truth);

  ConsistencyReport report;
  report.model = model;
  for (int n : ns) {
    std::vector<std::future<double>> futs;
    futs.reserve(reps);
    for (int r = 0; r < reps; ++r) {
      std::uint64_t sr =
          mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(n)) ^ static_cast<std::uint64_t>(r));
      futs.push_back(std::async(std::launch::async, [&, sr]() {
        std::vector<double> xs = truth_sample(truth, n, sr);
        EmpiricalMeasure m = build_empirical(xs);
        Quantile fitted;
        if (model == Model::Monotone) {
          fitted = fit_monotone(m, k).quantile();
        } else {
          LogConcaveConfig cfg;
          if (max_iter > 0) cfg.max_iter = max_iter;
          fitted = fit_logconcave(m, k, cfg).quantile();
        }
        return wp_distance(fitted, Quantile(tq), 2.0);
      }));
    }
    std::vector<double> w2(reps);
    for (int r = 0; r < reps; ++r) w2[r] = futs[r].get();
    std::sort(w2.begin(), w2.end());
    report.rows.push_back({n, sorted_quantile(w2, 0.5), sorted_quantile(w2, 0.25),
                           sorted_quantile(w2, 0.75)});
  }
  return report;
}

}  // namespace wproj
