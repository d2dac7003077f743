#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

// One agent class in a network of num_agents agents sharing a single channel.
// fraction is the population share eta_c, success_prob the per-attempt channel
// success probability p_c. threshold, when present, is the scheduling
// threshold in rescaled units (age divided by the number of agents).
struct ClassSpec {
  double fraction = 0.0;
  double success_prob = 0.0;
  std::optional<double> threshold;
};

struct NetworkSpec {
  std::vector<ClassSpec> classes;
  long long num_agents = 0;
};

// Nondecreasing age penalty with V(0) = 0: h, h^m (m > 0), or log(1 + a*h).
struct AgeFunction {
  enum class Kind { Linear, Power, Log };
  Kind kind = Kind::Linear;
  double m = 1.0;  // power exponent
  double a = 1.0;  // log slope

  double operator()(double h) const {
    switch (kind) {
      case Kind::Linear: return h;
      case Kind::Power: return std::pow(h, m);
      case Kind::Log: return std::log1p(a * h);
    }
    return h;
  }

  static AgeFunction linear() { return {Kind::Linear, 1.0, 1.0}; }
  static AgeFunction power(double m) {
    if (!(m > 0) || !std::isfinite(m))
      fail(Errc::OutOfRangeParameter, "power age function needs m > 0");
    return {Kind::Power, m, 1.0};
  }
  static AgeFunction log(double a) {
    if (!(a > 0) || !std::isfinite(a))
      fail(Errc::OutOfRangeParameter, "log age function needs a > 0");
    return {Kind::Log, 1.0, a};
  }
};

// Age rescaling: hhat = h / N. unscale_age is the plain inverse; ages and
// thresholds that must land back on integer slot counts go through
// unscale_to_slots, which snaps to the nearest integer (exact round trip for
// integer h, which a bare divide-multiply does not guarantee in floating
// point).
inline double rescale_age(double h, long long num_agents) {
  return h / static_cast<double>(num_agents);
}
inline double unscale_age(double hhat, long long num_agents) {
  return hhat * static_cast<double>(num_agents);
}
inline long long unscale_to_slots(double hhat, long long num_agents) {
  return std::llround(hhat * static_cast<double>(num_agents));
}

// Checks fractions sum to 1 (1e-9), success probabilities lie in (0, 1],
// thresholds (when set) are finite and >= 0, and every fraction * num_agents
// is a positive integer. Returns the per-class agent counts.
std::vector<long long> validate_network(const NetworkSpec& net);

// Same checks minus the integer class-size requirement, for fluid-only use
// where no finite population is involved.
void validate_classes(const std::vector<ClassSpec>& classes, bool require_thresholds);

}  // namespace aoi
