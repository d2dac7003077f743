#include "aoi/ks.hpp"

#include <algorithm>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

KsResult ks_distance(const OccupancySnapshot& snap, const Equilibrium& eq) {
  if (snap.rescaled_ages.size() != eq.num_classes())
    fail(Errc::ClassMismatch, "snapshot and equilibrium class counts differ");
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(snap.num_agents));
  for (const auto& v : snap.rescaled_ages) pooled.insert(pooled.end(), v.begin(), v.end());
  if (pooled.empty()) fail(Errc::ValidationError, "snapshot holds no agents");
  std::sort(pooled.begin(), pooled.end());

  const double n = static_cast<double>(pooled.size());
  double d = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const double g = eq.cdf_total(pooled[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - g,
                             g - static_cast<double>(i) / n));
  }
  return {d, static_cast<long long>(pooled.size())};
}

}  // namespace aoi
