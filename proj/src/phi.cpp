#include "wproj/phi.hpp"

#include <cmath>
#include <cstdlib>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

void require_domain(double v) {
  if (!(v > -1.0)) throw input_error("phi: argument must be > -1");
}

}  // namespace

double phi(double eta) {
  require_domain(eta);
  if (std::abs(eta) < 1e-3) {
    // 1 - e/2 + e^2/3 - e^3/4 + e^4/5 - e^5/6; next term < 1e-19 here.
    return 1.0 + eta * (-0.5 + eta * (1.0 / 3 + eta * (-0.25 + eta * (0.2 - eta / 6))));
  }
  return std::log1p(eta) / eta;
}

double phi_prime(double eta) {
  require_domain(eta);
  if (std::abs(eta) < 0.5) {
    // sum_{j>=1} (-1)^j j eta^{j-1} / (j+1): alternating, |ratio| <= |eta|.
    double sum = 0, pw = 1;
    for (int j = 1; j <= 80; ++j) {
      double term = ((j & 1) ? -1.0 : 1.0) * j * pw / (j + 1.0);
      sum += term;
      pw *= eta;
      if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-30) && j > 3) break;
    }
    return sum;
  }
  // (eta/(1+eta) - log1p(eta)) / eta^2; cancellation is mild for |eta| >= 1/2.
  return (eta / (1.0 + eta) - std::log1p(eta)) / (eta * eta);
}

// The closed forms below cancel catastrophically near 0 (numerators are
// O(delta^2) and O(delta^3) differences of O(1) quantities), so switch to the
// alternating series inside |delta| < 1/2, where ~60 terms reach full double
// precision and the series is the Taylor expansion required for small delta.

PhiMoments phi_moments(double delta) {
  require_domain(delta);
  PhiMoments m{};
  if (std::abs(delta) < 0.5) {
    // a = sum (-1)^j d^j / ((j+1)(j+2))
    // b = 2 sum (-1)^j H_{j+1} d^j / ((j+2)(j+3)),  H_m = 1 + 1/2 + ... + 1/m
    double a = 0, b = 0, pw = 1, harmonic = 1;  // harmonic = H_{j+1} at loop entry
    for (int j = 0; j <= 90; ++j) {
      double sgn = (j & 1) ? -1.0 : 1.0;
      double ta = sgn * pw / ((j + 1.0) * (j + 2.0));
      double tb = sgn * 2.0 * harmonic * pw / ((j + 2.0) * (j + 3.0));
      a += ta;
      b += tb;
      if (std::abs(ta) + std::abs(tb) < 1e-18 * (std::abs(a) + std::abs(b) + 1e-30) && j > 3)
        break;
      pw *= delta;
      harmonic += 1.0 / (j + 2.0);
    }
    m.a = a;
    m.b = b;
    return m;
  }
  const double L = std::log1p(delta);
  const double d2 = delta * delta;
  m.a = ((1.0 + delta) * L - delta) / d2;
  m.b = ((1.0 + delta) * (L * L - 2.0 * L + 2.0) - 2.0) / (d2 * delta);
  return m;
}

PhiMomentDerivs phi_moment_derivs(double delta) {
  require_domain(delta);
  PhiMomentDerivs d{};
  if (std::abs(delta) < 0.5) {
    // da = sum_{j>=1} (-1)^j j d^{j-1} / ((j+1)(j+2))
    // db = 2 sum_{j>=1} (-1)^j j H_{j+1} d^{j-1} / ((j+2)(j+3))
    double da = 0, db = 0, pw = 1, harmonic = 1.5;  // H_2 at j=1
    for (int j = 1; j <= 90; ++j) {
      double sgn = (j & 1) ? -1.0 : 1.0;
      double ta = sgn * j * pw / ((j + 1.0) * (j + 2.0));
      double tb = sgn * 2.0 * j * harmonic * pw / ((j + 2.0) * (j + 3.0));
      da += ta;
      db += tb;
      if (std::abs(ta) + std::abs(tb) < 1e-18 * (std::abs(da) + std::abs(db) + 1e-30) && j > 3)
        break;
      pw *= delta;
      harmonic += 1.0 / (j + 2.0);
    }
    d.da = da;
    d.db = db;
    return d;
  }
  const double L = std::log1p(delta);
  const double d3 = delta * delta * delta;
  d.da = (2.0 * delta - (2.0 + delta) * L) / d3;
  const double numer_b = (1.0 + delta) * (L * L - 2.0 * L + 2.0) - 2.0;
  d.db = (L * L * delta - 3.0 * numer_b) / (d3 * delta);
  return d;
}

}  // namespace wproj
