#include "aoi/equilibrium.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "aoi/quadrature.hpp"
#include "aoi/rootfind.hpp"

namespace aoi {

namespace {

constexpr double kNuTol = 1e-12;
constexpr int kMaxIter = 200;

double threshold_or_fail(const ClassSpec& c, std::size_t idx) {
  if (!c.threshold)
    fail(Errc::OutOfRangeParameter, "class " + std::to_string(idx) + ": threshold not set");
  return *c.threshold;
}

}  // namespace

double nu(double beta, const std::vector<ClassSpec>& classes) {
  double sum = 0.0;
  for (const auto& c : classes) {
    const double hp = *c.threshold * c.success_prob;
    if (hp > 0.0) sum += c.fraction * hp / (beta + hp);
  }
  return beta + sum - 1.0;
}

double nu_derivative(double beta, const std::vector<ClassSpec>& classes) {
  double sum = 0.0;
  for (const auto& c : classes) {
    const double hp = *c.threshold * c.success_prob;
    if (hp > 0.0) {
      const double d = beta + hp;
      sum += c.fraction * hp / (d * d);
    }
  }
  return 1.0 - sum;
}

double solve_beta(const std::vector<ClassSpec>& classes) {
  validate_classes(classes, /*require_thresholds=*/true);
  for (std::size_t i = 0; i < classes.size(); ++i) threshold_or_fail(classes[i], i);

  // Existence: sum_c eta_c / (H_c p_c) must exceed 1; zero thresholds make it
  // infinite, so any zero-threshold class passes the test by itself.
  bool has_zero_threshold = false;
  double condition = 0.0;
  for (const auto& c : classes) {
    const double hp = *c.threshold * c.success_prob;
    if (hp == 0.0) {
      has_zero_threshold = true;
    } else {
      condition += c.fraction / hp;
    }
  }
  if (!has_zero_threshold && condition <= 1.0 + 1e-12)
    fail(Errc::NoEquilibrium,
         "sum_c eta_c/(H_c p_c) = " + std::to_string(condition) +
             " <= 1; no stationary distribution for these thresholds");

  auto f = [&](double b) { return nu(b, classes); };

  // nu(1) >= 0 always; shrink the lower end geometrically until it brackets.
  double lo = 1e-3;
  int shrink = 0;
  while (f(lo) >= 0.0) {
    lo *= 0.5;
    if (++shrink > 2000 || lo < DBL_MIN)
      fail(Errc::NoConvergence, "solve_beta: could not bracket root from below");
  }
  double beta = num::bisect(f, lo, 1.0, kNuTol, 0.0, kMaxIter, "solve_beta");
  beta = num::newton_polish(f, [&](double b) { return nu_derivative(b, classes); }, beta,
                            0.0, 1.0, DBL_MIN);
  return beta;
}

Equilibrium solve_equilibrium(const std::vector<ClassSpec>& classes) {
  Equilibrium eq;
  eq.beta = solve_beta(classes);
  eq.classes = classes;
  eq.kappas.reserve(classes.size());
  for (const auto& c : classes)
    eq.kappas.push_back(c.fraction * c.success_prob / (eq.beta + *c.threshold * c.success_prob));
  return eq;
}

double Equilibrium::density(std::size_t c, double h) const {
  if (h < 0.0) return 0.0;
  const double H = threshold(c);
  const double k = kappas[c];
  if (h <= H) return k;
  return k * std::exp(-classes[c].success_prob * (h - H) / beta);
}

double Equilibrium::cdf(std::size_t c, double h) const {
  if (h <= 0.0) return 0.0;
  const double H = threshold(c);
  const double k = kappas[c];
  if (h <= H) return k * h;
  const double p = classes[c].success_prob;
  if (std::isinf(h)) return k * H + k * beta / p;
  return k * H + k * (beta / p) * (1.0 - std::exp(-p * (h - H) / beta));
}

double Equilibrium::cdf_total(double h) const {
  double sum = 0.0;
  for (std::size_t c = 0; c < num_classes(); ++c) sum += cdf(c, h);
  return sum;
}

double Equilibrium::mean_aoi(std::size_t c) const {
  const double H = threshold(c);
  const double k = kappas[c];
  const double eta = classes[c].fraction;
  // class-mean integral divided by the class mass
  return (k * H * H / 2.0 - eta * H + eta * eta / k) / eta;
}

double mean_age_value(const Equilibrium& eq, const AgeFunction& v) {
  double total = 0.0;
  for (std::size_t c = 0; c < eq.num_classes(); ++c) {
    const double H = eq.threshold(c);
    const double k = eq.kappas[c];
    const double p = eq.classes[c].success_prob;
    const double scale = eq.beta / p;
    double flat = 0.0;
    if (H > 0.0) flat = k * num::integrate([&](double h) { return v(h); }, 0.0, H);
    // Tail: k * int_H^inf exp(-(h-H)/scale) V(h) dh with u = exp(-(h-H)/scale).
    const double tail =
        k * scale *
        num::integrate(
            [&](double u) {
              if (u < DBL_MIN) u = DBL_MIN;
              return v(H - scale * std::log(u));
            },
            0.0, 1.0);
    total += flat + tail;
  }
  return total;
}

std::vector<double> thresholds_linear(const std::vector<ClassSpec>& classes, double epsilon) {
  validate_classes(classes, /*require_thresholds=*/false);
  double min_eta = 1.0;
  for (const auto& c : classes) min_eta = std::min(min_eta, c.fraction);
  if (!(epsilon > 0.0) || !(epsilon < min_eta) || !std::isfinite(epsilon))
    fail(Errc::EpsilonOutOfRange, "epsilon = " + std::to_string(epsilon) +
                                      " outside (0, " + std::to_string(min_eta) + ")");
  double s = 0.0;
  for (const auto& c : classes)
    s += std::sqrt((c.fraction * c.fraction + epsilon * epsilon) / c.success_prob);
  std::vector<double> out;
  out.reserve(classes.size());
  for (const auto& c : classes) {
    const double eta = c.fraction;
    out.push_back((eta - epsilon) /
                  std::sqrt((eta * eta + epsilon * epsilon) * c.success_prob) * s);
  }
  return out;
}

PowerOptimum thresholds_power(const std::vector<ClassSpec>& classes, double m) {
  validate_classes(classes, /*require_thresholds=*/false);
  if (!(m > 0.0) || !std::isfinite(m))
    fail(Errc::OutOfRangeParameter, "thresholds_power needs m > 0");
  double s = 0.0;
  for (const auto& c : classes) s += c.fraction * std::pow(c.success_prob, -m / (m + 1.0));
  PowerOptimum res;
  res.thresholds.reserve(classes.size());
  for (const auto& c : classes)
    res.thresholds.push_back(std::pow(c.success_prob, -1.0 / (m + 1.0)) * s);
  res.optimum = std::pow(s, m + 1.0) / (m + 1.0);
  return res;
}

namespace {

// log(1+x) - x, strictly decreasing from 0 on x > 0. Evaluated in extended
// precision: the difference loses half its digits to cancellation for small x,
// and the constraint sum downstream is compared against 1/a (up to 1e4), so
// plain double leaves residuals near 1e-8 where 1e-10 is required.
long double kkt_g(long double x) { return std::log1p(x) - x; }

// Unique x > 0 with kkt_g(x) = y for y < 0, bisected to long double precision.
long double kkt_inverse(long double y) {
  long double hi = 1.0L;
  while (kkt_g(hi) > y) {
    hi *= 2.0L;
    if (hi > 1e300L) fail(Errc::NoConvergence, "thresholds_log: inner bracket overflow");
  }
  long double lo = 0.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (mid == lo || mid == hi) break;
    (kkt_g(mid) > y ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

}  // namespace

LogOptimum thresholds_log(const std::vector<ClassSpec>& classes, double a) {
  validate_classes(classes, /*require_thresholds=*/false);
  if (!(a > 0.0) || !std::isfinite(a))
    fail(Errc::OutOfRangeParameter, "thresholds_log needs a > 0");

  const double target = 1.0 / a;
  auto residual = [&](double lambda, std::vector<long double>* xs_out) {
    long double sum = 0.0L;
    for (const auto& c : classes) {
      const long double x =
          kkt_inverse(static_cast<long double>(lambda) / c.success_prob);
      if (xs_out) xs_out->push_back(x);
      sum += static_cast<long double>(c.fraction) / (x * c.success_prob);
    }
    return static_cast<double>(sum - 1.0L / static_cast<long double>(a));
  };
  auto r = [&](double lambda) { return residual(lambda, nullptr); };

  // R(lambda) is increasing: lambda -> 0- sends every x_c -> 0+ and R -> +inf.
  double hi = -1.0;
  while (r(hi) < 0.0) {
    hi *= 0.5;
    if (-hi < 1e-300) fail(Errc::NoConvergence, "thresholds_log: outer bracket (hi)");
  }
  double lo = std::min(-1.0, 2.0 * hi);
  while (r(lo) > 0.0) {
    lo *= 2.0;
    if (-lo > 1e300) fail(Errc::NoConvergence, "thresholds_log: outer bracket (lo)");
  }
  const double rtol = 1e-13 * std::max(1.0, target);
  double lambda = num::bisect(r, lo, hi, rtol, 0.0, kMaxIter, "thresholds_log outer");
  // dR/dlambda = sum_c eta_c (1+x_c) / (p_c^2 x_c^3) > 0.
  auto dr = [&](double l) {
    double sum = 0.0;
    for (const auto& c : classes) {
      const double x =
          static_cast<double>(kkt_inverse(static_cast<long double>(l) / c.success_prob));
      const double p = c.success_prob;
      sum += c.fraction * (1.0 + x) / (p * p * x * x * x);
    }
    return sum;
  };
  lambda = num::newton_polish(r, dr, lambda, lo, hi, DBL_MIN);

  LogOptimum res;
  res.kkt.lambda = lambda;
  std::vector<long double> xs;
  res.kkt.constraint_residual = residual(lambda, &xs);
  res.thresholds.reserve(classes.size());
  long double optimum = 0.0L;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const long double x = xs[c];
    res.kkt.xs.push_back(static_cast<double>(x));
    res.kkt.stationarity_residuals.push_back(static_cast<double>(
        kkt_g(x) - static_cast<long double>(lambda) / classes[c].success_prob));
    res.thresholds.push_back(static_cast<double>(x / a));
    optimum += classes[c].fraction * ((1.0L / x + 1.0L) * std::log1p(x) - 1.0L);
  }
  res.optimum = static_cast<double>(optimum);
  return res;
}

double lower_bound_avg_aoi(const std::vector<ClassSpec>& classes, long long num_agents) {
  validate_classes(classes, /*require_thresholds=*/false);
  if (num_agents < 1) fail(Errc::OutOfRangeParameter, "num_agents must be >= 1");
  double s = 0.0;
  for (const auto& c : classes) s += c.fraction / std::sqrt(c.success_prob);
  return 0.5 * static_cast<double>(num_agents) * s * s;
}

double predicted_avg_aoi(const std::vector<ClassSpec>& classes, long long num_agents) {
  return lower_bound_avg_aoi(classes, num_agents);
}

}  // namespace aoi
