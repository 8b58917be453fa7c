#include "wproj/transport.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>

#include "wproj/errors.hpp"
#include "wproj/phi.hpp"

namespace wproj {

namespace {

const double kGlNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
const double kGlWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

// Restriction of one quantile to a single merged-grid cell [a, a+w].
struct CellFn {
  enum Kind { Const, Affine, Log } kind;
  double v0 = 0;     // value at the cell's left end
  double slope = 0;  // affine slope in u
  double h0 = 0, h1 = 0;  // log cell: reciprocal slopes at the ends
  double w = 0;

  double at(double s) const {  // s = offset into the cell, 0 <= s <= w
    switch (kind) {
      case Const: return v0;
      case Affine: return v0 + slope * s;
      default: break;
    }
    if (s <= 0) return v0;
    return v0 + (s / h0) * phi((h1 / h0 - 1.0) * s / w);
  }
};

struct PiecewiseView {
  const Partition* part;
  std::function<CellFn(double, double)> restrict_to;  // [a, b] within one cell
};

CellFn restrict_step(const StepQuantile& s, double a, double b) {
  CellFn f;
  f.kind = CellFn::Const;
  f.v0 = s.y[s.part.cell_of(0.5 * (a + b)) - 1];
  f.w = b - a;
  return f;
}

CellFn restrict_affine(const PwAffineQuantile& s, double a, double b) {
  int i = s.part.cell_of(0.5 * (a + b));
  CellFn f;
  f.kind = CellFn::Affine;
  f.slope = (s.q[i] - s.q[i - 1]) / s.part.du(i);
  f.v0 = s.q[i - 1] + (a - s.part.u[i - 1]) * f.slope;
  f.w = b - a;
  return f;
}

CellFn restrict_logconcave(const LogConcaveQuantile& s, double a, double b) {
  // h is affine inside the original cell, so the restriction is again a
  // (c, h) cell with endpoint reciprocal slopes h(a), h(b).
  int i = s.part.cell_of(0.5 * (a + b));
  double du = s.part.du(i);
  double ha = s.h[i - 1] + (s.h[i] - s.h[i - 1]) * ((a - s.part.u[i - 1]) / du);
  double hb = s.h[i - 1] + (s.h[i] - s.h[i - 1]) * ((b - s.part.u[i - 1]) / du);
  CellFn f;
  f.w = b - a;
  double sa = a - s.part.u[i - 1];
  f.v0 = sa <= 0 ? s.q[i - 1]
                 : s.q[i - 1] + (sa / s.h[i - 1]) * phi((s.h[i] / s.h[i - 1] - 1.0) * sa / du);
  if (std::abs(hb - ha) <= 1e-12 * ha) {
    f.kind = CellFn::Affine;
    f.slope = 1.0 / ha;
  } else {
    f.kind = CellFn::Log;
    f.h0 = ha;
    f.h1 = hb;
  }
  return f;
}

// \int_0^w |alpha + beta s|^p ds, exact for any p >= 1 (sign-split power rule).
double affine_abs_pow(double alpha, double beta, double w, double p) {
  if (std::abs(beta) * w <= 1e-15 * std::abs(alpha))
    return std::pow(std::abs(alpha), p) * w;
  auto antideriv = [&](double s) {
    double v = alpha + beta * s;
    return std::pow(std::abs(v), p + 1.0) * (v >= 0 ? 1.0 : -1.0) / (beta * (p + 1.0));
  };
  return antideriv(w) - antideriv(0.0);
}

double gl16(const std::function<double(double)>& f, double lo, double hi) {
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double acc = 0;
  for (int j = 0; j < 8; ++j)
    acc += kGlWeight[j] * (f(mid - half * kGlNode[j]) + f(mid + half * kGlNode[j]));
  return acc * half;
}

double cell_integral(const CellFn& fa, const CellFn& fb, double w, double p) {
  if (fa.kind != CellFn::Log && fb.kind != CellFn::Log) {
    double alpha = fa.v0 - fb.v0;
    double beta = (fa.kind == CellFn::Affine ? fa.slope : 0.0) -
                  (fb.kind == CellFn::Affine ? fb.slope : 0.0);
    return affine_abs_pow(alpha, beta, w, p);
  }
  auto diff = [&](double s) { return fa.at(s) - fb.at(s); };
  auto integrand = [&](double s) { return std::pow(std::abs(diff(s)), p); };
  // Even integer powers are smooth; otherwise split at sign changes of the
  // difference so Gauss-Legendre never straddles the |.| kink.
  bool smooth = (p == 2.0) || (p == std::floor(p) && (static_cast<long>(p) % 2 == 0));
  if (smooth) return gl16(integrand, 0.0, w);

  std::vector<double> cuts{0.0};
  double prev_s = 0.0, prev_v = diff(0.0);
  for (int j = 1; j <= 24; ++j) {
    double s = w * j / 24.0;
    double v = diff(s);
    if ((prev_v < 0 && v > 0) || (prev_v > 0 && v < 0)) {
      double lo = prev_s, hi = s, vlo = prev_v;
      for (int it = 0; it < 80; ++it) {
        double m = 0.5 * (lo + hi), vm = diff(m);
        if ((vlo < 0 && vm < 0) || (vlo > 0 && vm > 0)) {
          lo = m;
          vlo = vm;
        } else {
          hi = m;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    prev_s = s;
    prev_v = v;
  }
  cuts.push_back(w);
  double acc = 0;
  for (size_t j = 1; j < cuts.size(); ++j)
    if (cuts[j] > cuts[j - 1]) acc += gl16(integrand, cuts[j - 1], cuts[j]);
  return acc;
}

PiecewiseView view_of(const Quantile& q) {
  if (const auto* s = std::get_if<StepQuantile>(&q))
    return {&s->part, [s](double a, double b) { return restrict_step(*s, a, b); }};
  if (const auto* s = std::get_if<PwAffineQuantile>(&q))
    return {&s->part, [s](double a, double b) { return restrict_affine(*s, a, b); }};
  const auto* s = std::get_if<LogConcaveQuantile>(&q);
  return {&s->part, [s](double a, double b) { return restrict_logconcave(*s, a, b); }};
}

}  // namespace

double wp_distance(const Quantile& qa, const Quantile& qb, double p) {
  if (!(p >= 1.0)) throw input_error("wp_distance requires p >= 1");

  const bool analytic = std::holds_alternative<AnalyticQuantile>(qa) ||
                        std::holds_alternative<AnalyticQuantile>(qb);
  if (analytic) {
    auto f = [&](double u) { return std::pow(std::abs(eval(qa, u) - eval(qb, u)), p); };
    using boost::math::quadrature::gauss_kronrod;
    double total = gauss_kronrod<double, 15>::integrate(f, 1e-12, 1.0 - 1e-12, 20, 1e-12);
    return std::pow(total, 1.0 / p);
  }

  PiecewiseView va = view_of(qa), vb = view_of(qb);
  Partition grid = merge_partitions(*va.part, *vb.part);
  double total = 0;
  for (int i = 1; i <= grid.cells(); ++i) {
    double a = grid.u[i - 1], b = grid.u[i];
    total += cell_integral(va.restrict_to(a, b), vb.restrict_to(a, b), b - a, p);
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace wproj
