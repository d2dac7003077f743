#pragma once

#include "aoi/equilibrium.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

struct KsResult {
  double statistic = 0.0;  // in [0, 1]
  long long n_samples = 0;
};

// Two-sided Kolmogorov-Smirnov distance between the pooled empirical
// distribution of rescaled ages (all classes together) and the stationary
// mixture CDF. The sup runs over every sample point and its left limit, so a
// single sample at 0 against an exponential-type law gives statistic 1.
KsResult ks_distance(const OccupancySnapshot& snap, const Equilibrium& eq);

}  // namespace aoi
