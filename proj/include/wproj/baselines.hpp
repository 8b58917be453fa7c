#pragma once

#include <utility>
#include <vector>

#include "wproj/density.hpp"
#include "wproj/measures.hpp"
#include "wproj/quantiles.hpp"

namespace wproj {

// Greatest convex minorant knots of a set of points with strictly increasing
// abscissae (single monotone-chain pass).  Linear interpolation through the
// returned knots is the largest convex function lying below every input point.
std::vector<std::pair<double, double>> gcm(
    const std::vector<std::pair<double, double>>& points);

// Grenander's monotone density estimator, built on the quantile side: the
// GCM of the empirical quantile pinned at (0,0), then reciprocal slopes.
PwAffineQuantile grenander_quantile(const EmpiricalMeasure& m);
DensityModel grenander(const EmpiricalMeasure& m);

}  // namespace wproj
