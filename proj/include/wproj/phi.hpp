#pragma once

namespace wproj {

// phi(eta) = log(1 + eta) / eta, extended by phi(0) = 1.  Positive, convex,
// decreasing on (-1, inf).  Series evaluation near 0 avoids the 0/0.
double phi(double eta);
double phi_prime(double eta);

// Moments of phi against lambda on (0,1):
//   a = \int_0^1 lambda phi(delta lambda) dlambda
//   b = \int_0^1 lambda^2 phi(delta lambda)^2 dlambda
// Closed forms:
//   a(delta) = ((1+delta) log1p(delta) - delta) / delta^2
//   b(delta) = ((1+delta)(L^2 - 2L + 2) - 2) / delta^3,  L = log1p(delta)
// with alternating series below |delta| = 1/2 where the closed forms cancel.
struct PhiMoments {
  double a;
  double b;
};

PhiMoments phi_moments(double delta);

// d/ddelta of the two moments (needed by the analytic gradient).
struct PhiMomentDerivs {
  double da;
  double db;
};

PhiMomentDerivs phi_moment_derivs(double delta);

}  // namespace wproj
