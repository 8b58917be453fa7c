#include "wproj/density.hpp"

#include <algorithm>
#include <cmath>

namespace wproj {

double DensitySegment::eval(double x) const {
  if (beta == 0.0) return f_lo;
  return f_lo * std::exp(beta * (x - x_lo));
}

double DensitySegment::mass() const {
  double w = x_hi - x_lo;
  if (beta == 0.0) return f_lo * w;
  return f_lo * std::expm1(beta * w) / beta;
}

double DensityModel::eval(double x) const {
  if (segments.empty()) return 0.0;
  if (x <= support_lo || x > support_hi) return 0.0;
  // segments are ordered by x_lo; find the piece whose half-open interval
  // (x_lo, x_hi] holds x
  auto it = std::upper_bound(segments.begin(), segments.end(), x,
                             [](double v, const DensitySegment& s) { return v < s.x_hi; });
  if (it == segments.end()) --it;
  return it->eval(x);
}

double density_mass(const DensityModel& d) {
  double m = d.atom_mass;
  for (const auto& s : d.segments) m += s.mass();
  return m;
}

}  // namespace wproj
