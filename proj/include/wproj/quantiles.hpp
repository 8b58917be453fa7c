#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "wproj/measures.hpp"

namespace wproj {

// Continuous piecewise-affine quantile through knots (u[i], q[i]).
struct PwAffineQuantile {
  Partition part;
  std::vector<double> q;  // size cells()+1, non-decreasing

  double eval(double u) const;
};

// Quantile parametrized by c = Q(0) and knot values h[i] of the reciprocal
// slope h = 1/Q', with h piecewise affine on the partition.  Within cell i,
//   Q(u) = q[i-1] + ((u - u[i-1]) / h[i-1]) * phi(delta_i (u - u[i-1]) / du_i),
// delta_i = h[i]/h[i-1] - 1.  The knots q are cached at construction.
struct LogConcaveQuantile {
  Partition part;
  double c = 0;
  std::vector<double> h;  // size cells()+1, all > 0
  std::vector<double> q;  // size cells()+1, q[0] = c

  double eval(double u) const;
};

// Analytic quantile (truth distributions, test oracles).
struct AnalyticQuantile {
  std::function<double(double)> q;  // defined on (0,1)

  double eval(double u) const { return q(u); }
};

using Quantile =
    std::variant<StepQuantile, PwAffineQuantile, LogConcaveQuantile, AnalyticQuantile>;

double eval(const Quantile& Q, double u);

// Integral of Q over (0,1) (the mean of the measure); closed form for the
// piecewise representations, adaptive quadrature for analytic ones.
double mean_of(const Quantile& Q);

// n pseudo-uniform draws through the quantile transform.  Deterministic for a
// fixed seed: mt19937_64 words mapped to (0,1) via ((word >> 11) + 0.5) / 2^53.
std::vector<double> sample(const Quantile& Q, int n, std::uint64_t seed);

// Quantile of the image measure under x -> a + b x, b != 0.  For b < 0 the
// parameter axis reflects: the result evaluates to a + b Q(1-u).
Quantile pushforward_affine(const Quantile& Q, double a, double b);

}  // namespace wproj
