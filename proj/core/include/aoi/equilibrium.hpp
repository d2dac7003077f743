#pragma once

#include <vector>

#include "aoi/model.hpp"

namespace aoi {

// Stationary fluid occupancy for a threshold-scheduled network, in rescaled
// age units. Each class has a flat density kappa_c on [0, H_c] and an
// exponential tail kappa_c * exp(-p_c (h - H_c) / beta) above its threshold;
// beta is the stationary fraction of agents above their thresholds.
struct Equilibrium {
  double beta = 0.0;
  std::vector<double> kappas;
  std::vector<ClassSpec> classes;

  std::size_t num_classes() const { return classes.size(); }
  double threshold(std::size_t c) const { return *classes[c].threshold; }

  double density(std::size_t c, double h) const;
  // Per-class CDF contribution, normalized so the grand total over classes is
  // 1; cdf(c, inf) = fraction of class c. Accepts +infinity.
  double cdf(std::size_t c, double h) const;
  // Aggregate CDF over all classes.
  double cdf_total(double h) const;
  // Closed-form stationary mean age of class c (normalized by the class
  // fraction, i.e. the conditional mean age of a class-c agent).
  double mean_aoi(std::size_t c) const;
};

// nu(beta) = beta + sum_c eta_c H_c p_c / (beta + H_c p_c) - 1. Its root on
// (0, 1] is the equilibrium beta. Zero-threshold classes contribute 0 to the
// sum by convention (also at beta = 0).
double nu(double beta, const std::vector<ClassSpec>& classes);
double nu_derivative(double beta, const std::vector<ClassSpec>& classes);

// Root of nu. Requires sum_c eta_c / (H_c p_c) > 1 + 1e-12 (zero thresholds
// count as +infinity); throws NoEquilibrium otherwise. Bisection on
// [beta_lo, 1] with beta_lo shrunk geometrically from 1e-3 until it brackets,
// plus a Newton polish; |nu| <= 1e-12 at the returned root.
double solve_beta(const std::vector<ClassSpec>& classes);

Equilibrium solve_equilibrium(const std::vector<ClassSpec>& classes);

// Stationary mean of V(age) under the equilibrium, aggregated over classes
// (weighted by class fractions). Flat parts and exponential tails are
// integrated by adaptive quadrature; the tail uses the substitution
// u = exp(-p (h - H) / beta) to a finite interval.
double mean_age_value(const Equilibrium& eq, const AgeFunction& v);

// Thresholds minimizing mean linear age, parameterized by epsilon in
// (0, min_c eta_c); the epsilon -> 0 limit is (1/sqrt(p_c)) sum_j eta_j /
// sqrt(p_j). Throws EpsilonOutOfRange for epsilon outside the open interval.
std::vector<double> thresholds_linear(const std::vector<ClassSpec>& classes, double epsilon);

struct PowerOptimum {
  std::vector<double> thresholds;
  double optimum;  // limiting mean of hhat^m at the optimal thresholds
};

// Optimal thresholds for V(h) = h^m, m >= 1: H_c = p_c^{-1/(m+1)} * S with
// S = sum_j eta_j p_j^{-m/(m+1)}; optimum S^{m+1}/(m+1). These sit exactly on
// the equilibrium-existence boundary (the optimum is the limiting value).
PowerOptimum thresholds_power(const std::vector<ClassSpec>& classes, double m);

struct KktSolution {
  double lambda = 0.0;            // multiplier, always < 0
  std::vector<double> xs;         // per-class x_c > 0 with log(1+x_c) - x_c = lambda / p_c
  double constraint_residual = 0.0;             // sum_c eta_c/(x_c p_c) - 1/a
  std::vector<double> stationarity_residuals;   // log(1+x_c) - x_c - lambda/p_c
};

struct LogOptimum {
  std::vector<double> thresholds;  // H_c = x_c / a
  double optimum;                  // limiting mean of log(1 + a*hhat)
  KktSolution kkt;
};

// Optimal thresholds for V(h) = log(1 + a h), a > 0, via the KKT system
// solved by nested bisection: the outer loop finds lambda < 0 such that the
// inner roots x_c(lambda) satisfy sum_c eta_c/(x_c p_c) = 1/a. As with the
// power case, the thresholds sit on the existence boundary.
LogOptimum thresholds_log(const std::vector<ClassSpec>& classes, double a);

// Limiting time-average AoI of the network under optimal linear thresholds,
// equal to the scheduling lower bound: (N/2) (sum_c eta_c / sqrt(p_c))^2.
double lower_bound_avg_aoi(const std::vector<ClassSpec>& classes, long long num_agents);
double predicted_avg_aoi(const std::vector<ClassSpec>& classes, long long num_agents);

}  // namespace aoi
