#pragma once

#include "wproj/quantiles.hpp"

namespace wproj {

// p-Wasserstein distance ( \int_0^1 |Qa - Qb|^p du )^{1/p}, p >= 1.
// Piecewise representations are integrated cell by cell on the merged knot
// set: exactly where both restrictions are affine or constant, by 16-point
// Gauss-Legendre where a log-concave cell is genuinely curved.  Pairs
// involving an analytic quantile fall back to adaptive quadrature with
// absolute tolerance 1e-10.
double wp_distance(const Quantile& qa, const Quantile& qb, double p);

}  // namespace wproj
