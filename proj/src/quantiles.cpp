#include "wproj/quantiles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "wproj/errors.hpp"
#include "wproj/phi.hpp"

namespace wproj {

double PwAffineQuantile::eval(double u) const {
  int i = part.cell_of(u);
  double t = (u - part.u[i - 1]) / part.du(i);
  return q[i - 1] + t * (q[i] - q[i - 1]);
}

double LogConcaveQuantile::eval(double u) const {
  int i = part.cell_of(u);
  double s = u - part.u[i - 1];
  if (s <= 0) return q[i - 1];
  double delta = h[i] / h[i - 1] - 1.0;
  return q[i - 1] + (s / h[i - 1]) * phi(delta * s / part.du(i));
}

double eval(const Quantile& Q, double u) {
  return std::visit([u](const auto& f) { return f.eval(u); }, Q);
}

namespace {

double analytic_integral(const std::function<double(double)>& f) {
  // Clipped at the endpoints so unbounded (but integrable) quantiles stay
  // finite at the nodes; the clipped tail mass is far below the tolerance.
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, 1e-12, 1.0 - 1e-12, 20, 1e-12);
}

}  // namespace

double mean_of(const Quantile& Q) {
  struct Visitor {
    double operator()(const StepQuantile& s) const {
      double m = 0;
      for (int i = 1; i <= s.part.cells(); ++i) m += s.y[i - 1] * s.part.du(i);
      return m;
    }
    double operator()(const PwAffineQuantile& s) const {
      double m = 0;
      for (int i = 1; i <= s.part.cells(); ++i)
        m += 0.5 * (s.q[i - 1] + s.q[i]) * s.part.du(i);
      return m;
    }
    double operator()(const LogConcaveQuantile& s) const {
      // \int_cell Q = q_{i-1} du_i + du_i^2 A(delta_i) / h_{i-1}
      double m = 0;
      for (int i = 1; i <= s.part.cells(); ++i) {
        double du = s.part.du(i);
        double delta = s.h[i] / s.h[i - 1] - 1.0;
        m += s.q[i - 1] * du + du * du * phi_moments(delta).a / s.h[i - 1];
      }
      return m;
    }
    double operator()(const AnalyticQuantile& s) const {
      return analytic_integral(s.q);
    }
  };
  return std::visit(Visitor{}, Q);
}

std::vector<double> sample(const Quantile& Q, int n, std::uint64_t seed) {
  if (n < 1) throw input_error("sample size must be >= 1");
  std::mt19937_64 gen(seed);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    // 53-bit mantissa mapped strictly inside (0,1).
    double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    out[i] = eval(Q, u);
  }
  return out;
}

namespace {

Partition reflect(const Partition& p) {
  Partition r;
  int k = p.cells();
  r.u.resize(k + 1);
  for (int j = 0; j <= k; ++j) r.u[j] = 1.0 - p.u[k - j];
  r.u.front() = 0.0;
  r.u.back() = 1.0;
  return r;
}

}  // namespace

Quantile pushforward_affine(const Quantile& Q, double a, double b) {
  if (b == 0.0) throw input_error("affine pushforward needs b != 0");
  struct Visitor {
    double a, b;
    Quantile operator()(const StepQuantile& s) const {
      int k = s.part.cells();
      StepQuantile out;
      if (b > 0) {
        out.part = s.part;
        out.y.resize(k);
        for (int i = 0; i < k; ++i) out.y[i] = a + b * s.y[i];
      } else {
        out.part = reflect(s.part);
        out.y.resize(k);
        for (int i = 0; i < k; ++i) out.y[i] = a + b * s.y[k - 1 - i];
      }
      return out;
    }
    Quantile operator()(const PwAffineQuantile& s) const {
      int k = s.part.cells();
      PwAffineQuantile out;
      out.q.resize(k + 1);
      if (b > 0) {
        out.part = s.part;
        for (int j = 0; j <= k; ++j) out.q[j] = a + b * s.q[j];
      } else {
        out.part = reflect(s.part);
        for (int j = 0; j <= k; ++j) out.q[j] = a + b * s.q[k - j];
      }
      return out;
    }
    Quantile operator()(const LogConcaveQuantile& s) const {
      // x -> a + bx maps h = 1/Q' to h/|b|; a reflection also reverses the
      // parameter axis, under which h stays piecewise affine.
      int k = s.part.cells();
      LogConcaveQuantile out;
      out.h.resize(k + 1);
      out.q.resize(k + 1);
      if (b > 0) {
        out.part = s.part;
        out.c = a + b * s.c;
        for (int j = 0; j <= k; ++j) {
          out.h[j] = s.h[j] / b;
          out.q[j] = a + b * s.q[j];
        }
      } else {
        out.part = reflect(s.part);
        out.c = a + b * s.q[k];
        for (int j = 0; j <= k; ++j) {
          out.h[j] = s.h[k - j] / (-b);
          out.q[j] = a + b * s.q[k - j];
        }
      }
      return out;
    }
    Quantile operator()(const AnalyticQuantile& s) const {
      auto f = s.q;
      double aa = a, bb = b;
      if (b > 0) return AnalyticQuantile{[f, aa, bb](double u) { return aa + bb * f(u); }};
      return AnalyticQuantile{[f, aa, bb](double u) { return aa + bb * f(1.0 - u); }};
    }
  };
  return std::visit(Visitor{a, b}, Q);
}

}  // namespace wproj
