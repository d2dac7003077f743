#include "aoi/model.hpp"

#include <cmath>
#include <string>

namespace aoi {

namespace {

void check_class_common(const ClassSpec& c, std::size_t idx, bool require_threshold) {
  const std::string where = "class " + std::to_string(idx);
  if (!std::isfinite(c.fraction) || c.fraction <= 0.0 || c.fraction > 1.0)
    fail(Errc::OutOfRangeParameter, where + ": fraction must lie in (0, 1]");
  if (!std::isfinite(c.success_prob) || c.success_prob <= 0.0 || c.success_prob > 1.0)
    fail(Errc::OutOfRangeParameter, where + ": success_prob must lie in (0, 1]");
  if (c.threshold) {
    if (!std::isfinite(*c.threshold) || *c.threshold < 0.0)
      fail(Errc::OutOfRangeParameter, where + ": threshold must be finite and >= 0");
  } else if (require_threshold) {
    fail(Errc::OutOfRangeParameter, where + ": threshold required but not set");
  }
}

void check_fraction_sum(const std::vector<ClassSpec>& classes) {
  double sum = 0.0;
  for (const auto& c : classes) sum += c.fraction;
  if (std::abs(sum - 1.0) > 1e-9)
    fail(Errc::FractionSumMismatch,
         "class fractions sum to " + std::to_string(sum) + ", expected 1");
}

}  // namespace

void validate_classes(const std::vector<ClassSpec>& classes, bool require_thresholds) {
  if (classes.empty()) fail(Errc::ValidationError, "at least one class required");
  for (std::size_t i = 0; i < classes.size(); ++i)
    check_class_common(classes[i], i, require_thresholds);
  check_fraction_sum(classes);
}

std::vector<long long> validate_network(const NetworkSpec& net) {
  if (net.num_agents < 1)
    fail(Errc::OutOfRangeParameter, "num_agents must be >= 1");
  validate_classes(net.classes, /*require_thresholds=*/false);
  std::vector<long long> sizes;
  sizes.reserve(net.classes.size());
  long long total = 0;
  for (std::size_t i = 0; i < net.classes.size(); ++i) {
    const double exact = net.classes[i].fraction * static_cast<double>(net.num_agents);
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) > 1e-6 || rounded < 1.0)
      fail(Errc::NonIntegerClassSize,
           "class " + std::to_string(i) + ": fraction * num_agents = " +
               std::to_string(exact) + " is not a positive integer");
    sizes.push_back(static_cast<long long>(rounded));
    total += sizes.back();
  }
  if (total != net.num_agents)
    fail(Errc::NonIntegerClassSize, "class sizes sum to " + std::to_string(total) +
                                        ", expected " + std::to_string(net.num_agents));
  return sizes;
}

}  // namespace aoi
