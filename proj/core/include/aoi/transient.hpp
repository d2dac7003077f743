#pragma once

#include <functional>
#include <vector>

#include "aoi/equilibrium.hpp"
#include "aoi/model.hpp"

namespace aoi {

// Time-dependent fluid densities f_c(t, h) on a uniform age grid, advanced by
// first-order explicit upwind transport with a per-class relaxation sink
// above each threshold and a boundary refill at h = 0:
//
//   transported_k = f_k - (dt/dh) (f_k - f_{k-1})
//   f'_k = transported_k * (1 - s_c)   for grid ages strictly above H_c
//   f'_0 = s_c * max(eta_c - F_c(H_c), 0) / dt
//
// where F_c(H_c) is the left-Riemann CDF below the threshold, beta(t) =
// 1 - sum_c F_c(H_c) clamped below at 1e-12, and s_c = min(dt p_c / beta, 1)
// is the drain fraction. The cap keeps the step nonnegative and bounded when
// nearly all mass sits below the thresholds (where the uncapped linear sink
// would remove many times the available mass in one step); away from that
// regime s_c = dt p_c / beta and the update is the plain linear one.
class TransientSolution {
 public:
  using InitFn = std::function<double(std::size_t cls, double h)>;

  // Samples init on the grid, checks the discrete mass is within 1e-3 of 1
  // (MassDeficit otherwise), then renormalizes exactly.
  static TransientSolution init(const std::vector<ClassSpec>& classes, const InitFn& density,
                                double grid_step, double h_max);

  // Default grid extent: max threshold plus 20 tail scales at beta = 1.
  static double default_h_max(const std::vector<ClassSpec>& classes);

  void step(double dt);                  // dt in (0, grid_step]; CflViolation above
  void run_to(double t_end, double dt);  // repeated steps plus one remainder step

  double time() const { return time_; }
  double grid_step() const { return dh_; }
  double h_max() const { return dh_ * static_cast<double>(cells_ - 1); }
  std::size_t num_cells() const { return cells_; }
  std::size_t num_classes() const { return classes_.size(); }
  const std::vector<ClassSpec>& classes() const { return classes_; }

  double density(std::size_t c, std::size_t k) const { return f_[c][k]; }
  const std::vector<double>& densities(std::size_t c) const { return f_[c]; }
  double grid_h(std::size_t k) const { return dh_ * static_cast<double>(k); }

  double class_mass(std::size_t c) const;
  double total_mass() const;
  // Largest |total mass - 1| seen at any step boundary so far.
  double max_mass_error() const { return max_mass_error_; }
  double beta_last() const { return beta_last_; }

  double sup_distance(const Equilibrium& eq) const;
  double sup_distance(const InitFn& reference) const;

 private:
  TransientSolution() = default;

  std::vector<ClassSpec> classes_;
  std::vector<std::vector<double>> f_;  // per class, cells_ values
  std::vector<std::size_t> below_;      // grid points strictly below threshold
  std::vector<std::size_t> sink_from_;  // first grid index strictly above threshold
  double dh_ = 0.0;
  std::size_t cells_ = 0;
  double time_ = 0.0;
  double max_mass_error_ = 0.0;
  double beta_last_ = 1.0;
};

TransientSolution::InitFn equilibrium_initializer(const Equilibrium& eq);

// Per-class Gaussian bumps scaled by the class fractions and truncated at 0;
// normalization is left to init's exact renormalization.
TransientSolution::InitFn gaussian_initializer(const std::vector<ClassSpec>& classes,
                                               double mean, double stddev);

}  // namespace aoi
