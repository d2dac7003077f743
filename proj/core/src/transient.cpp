#include "aoi/transient.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aoi {

namespace {
constexpr double kBetaFloor = 1e-12;
constexpr double kMassTol = 1e-3;
}  // namespace

double TransientSolution::default_h_max(const std::vector<ClassSpec>& classes) {
  double max_h = 0.0;
  double min_p = 1.0;
  for (const auto& c : classes) {
    max_h = std::max(max_h, c.threshold.value_or(0.0));
    min_p = std::min(min_p, c.success_prob);
  }
  return max_h + 20.0 / min_p;
}

TransientSolution TransientSolution::init(const std::vector<ClassSpec>& classes,
                                          const InitFn& density, double grid_step,
                                          double h_max) {
  validate_classes(classes, /*require_thresholds=*/true);
  if (!(grid_step > 0.0) || !std::isfinite(grid_step))
    fail(Errc::OutOfRangeParameter, "grid_step must be > 0");
  double max_thresh = 0.0;
  for (const auto& c : classes) max_thresh = std::max(max_thresh, *c.threshold);
  if (!(h_max > max_thresh) || !std::isfinite(h_max))
    fail(Errc::OutOfRangeParameter, "h_max must exceed every threshold");

  TransientSolution s;
  s.classes_ = classes;
  s.dh_ = grid_step;
  s.cells_ = static_cast<std::size_t>(std::ceil(h_max / grid_step - 1e-9)) + 1;
  s.f_.assign(classes.size(), std::vector<double>(s.cells_, 0.0));
  s.below_.resize(classes.size());
  s.sink_from_.resize(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double H = *classes[c].threshold;
    // Grid points with h < H (left-Riemann CDF range) and the first point
    // with h > H (start of the relaxation sink). A point equal to H belongs
    // to neither.
    s.below_[c] = static_cast<std::size_t>(std::ceil(H / grid_step - 1e-9));
    s.sink_from_[c] = static_cast<std::size_t>(std::floor(H / grid_step + 1e-9)) + 1;
  }

  double mass = 0.0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t k = 0; k < s.cells_; ++k) {
      const double v = density(c, s.grid_h(k));
      if (!(v >= 0.0) || !std::isfinite(v))
        fail(Errc::ValidationError, "initial density must be finite and >= 0");
      s.f_[c][k] = v;
      mass += v;
    }
  }
  mass *= grid_step;
  if (std::abs(mass - 1.0) > kMassTol)
    fail(Errc::MassDeficit, "initial density integrates to " + std::to_string(mass) +
                                " on the grid; more than 1e-3 away from 1");
  for (auto& cls : s.f_)
    for (auto& v : cls) v /= mass;
  return s;
}

void TransientSolution::step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    fail(Errc::OutOfRangeParameter, "dt must be > 0");
  if (dt > dh_ * (1.0 + 1e-9))
    fail(Errc::CflViolation, "dt = " + std::to_string(dt) + " exceeds grid_step = " +
                                 std::to_string(dh_));

  const std::size_t C = classes_.size();
  const std::size_t K = cells_;
  const double cfl = dt / dh_;

  double below_total = 0.0;
  double mass_total = 0.0;
  std::vector<double> below_mass(C);
  for (std::size_t c = 0; c < C; ++c) {
    const std::vector<double>& f = f_[c];
    const std::size_t m = below_[c];
    double acc = 0.0;
    std::size_t k = 0;
    for (; k < m; ++k) acc += f[k];
    below_mass[c] = acc * dh_;
    double rest = 0.0;
    for (; k < K; ++k) rest += f[k];
    below_total += below_mass[c];
    mass_total += below_mass[c] + rest * dh_;
  }
  max_mass_error_ = std::max(max_mass_error_, std::abs(mass_total - 1.0));
  const double beta = std::max(1.0 - below_total, kBetaFloor);
  beta_last_ = beta;

  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double>& f = f_[c];
    const double p = classes_[c].success_prob;
    const double s = std::min(dt * p / beta, 1.0);
    const double keep = 1.0 - s;
    const std::size_t sink0 = sink_from_[c];
    for (std::size_t k = K - 1; k >= 1; --k) {
      const double transported = f[k] + cfl * (f[k - 1] - f[k]);
      f[k] = (k >= sink0) ? transported * keep : transported;
    }
    const double eta = classes_[c].fraction;
    f[0] = s * std::max(eta - below_mass[c], 0.0) / dt;
  }
  time_ += dt;
}

void TransientSolution::run_to(double t_end, double dt) {
  if (t_end < time_) fail(Errc::OutOfRangeParameter, "t_end is in the past");
  while (time_ < t_end - 1e-12) {
    const double remaining = t_end - time_;
    step(remaining >= dt ? dt : remaining);
  }
  // Record the terminal mass error as well.
  max_mass_error_ = std::max(max_mass_error_, std::abs(total_mass() - 1.0));
}

double TransientSolution::class_mass(std::size_t c) const {
  double acc = 0.0;
  for (double v : f_[c]) acc += v;
  return acc * dh_;
}

double TransientSolution::total_mass() const {
  double acc = 0.0;
  for (std::size_t c = 0; c < classes_.size(); ++c) acc += class_mass(c);
  return acc;
}

double TransientSolution::sup_distance(const Equilibrium& eq) const {
  double d = 0.0;
  for (std::size_t c = 0; c < classes_.size(); ++c)
    for (std::size_t k = 0; k < cells_; ++k)
      d = std::max(d, std::abs(f_[c][k] - eq.density(c, grid_h(k))));
  return d;
}

double TransientSolution::sup_distance(const InitFn& reference) const {
  double d = 0.0;
  for (std::size_t c = 0; c < classes_.size(); ++c)
    for (std::size_t k = 0; k < cells_; ++k)
      d = std::max(d, std::abs(f_[c][k] - reference(c, grid_h(k))));
  return d;
}

TransientSolution::InitFn equilibrium_initializer(const Equilibrium& eq) {
  return [eq](std::size_t c, double h) { return eq.density(c, h); };
}

TransientSolution::InitFn gaussian_initializer(const std::vector<ClassSpec>& classes,
                                               double mean, double stddev) {
  if (!(stddev > 0.0)) fail(Errc::OutOfRangeParameter, "stddev must be > 0");
  std::vector<double> fractions;
  fractions.reserve(classes.size());
  for (const auto& c : classes) fractions.push_back(c.fraction);
  const double inv_norm = 1.0 / (stddev * std::sqrt(2.0 * 3.141592653589793238462643383280));
  return [fractions, mean, stddev, inv_norm](std::size_t c, double h) {
    if (h < 0.0) return 0.0;
    const double z = (h - mean) / stddev;
    return fractions[c] * inv_norm * std::exp(-0.5 * z * z);
  };
}

}  // namespace aoi
