#pragma once

#include <vector>

namespace wproj {

// One density piece on (x_lo, x_hi]: f(x) = f_lo * exp(beta * (x - x_lo)).
// beta = 0 gives the piecewise-constant (monotone) case.
struct DensitySegment {
  double x_lo;
  double x_hi;
  double f_lo;   // value at the left end, > 0
  double beta;   // log-slope

  double eval(double x) const;
  double mass() const;  // integral over the segment
};

struct DensityModel {
  std::vector<DensitySegment> segments;  // contiguous, left to right
  double support_lo = 0;
  double support_hi = 0;
  // Raised when zero-width quantile steps were merged away; the merged mass
  // sits as an atom at the boundary and is excluded from the segments.
  bool boundary_atom = false;
  double atom_mass = 0;

  double eval(double x) const;  // 0 outside the support
};

double density_mass(const DensityModel& d);

}  // namespace wproj
