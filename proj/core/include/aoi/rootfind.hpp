#pragma once

#include <cmath>
#include <string>

#include "aoi/errors.hpp"

namespace aoi::num {

// Bisection on a bracketing interval [lo, hi] with f(lo) and f(hi) of opposite
// sign (f(lo) <= 0 <= f(hi) or the reverse). Stops when |f| <= ftol or the
// interval width drops below xtol; throws NoConvergence after max_iter
// without meeting ftol if the residual is still above it.
template <class F>
double bisect(F&& f, double lo, double hi, double ftol, double xtol, int max_iter,
              const char* what) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::abs(flo) <= ftol) return lo;
  if (std::abs(fhi) <= ftol) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    fail(Errc::NoConvergence, std::string(what) + ": root not bracketed");
  double best_x = lo;
  double best_f = std::abs(flo);
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (std::abs(fmid) < best_f) {
      best_f = std::abs(fmid);
      best_x = mid;
    }
    if (std::abs(fmid) <= ftol) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
    if (hi - lo <= xtol) break;
  }
  if (best_f <= ftol) return best_x;
  // Interval exhausted; accept the best point only if it is close.
  if (best_f <= ftol * 1e3) return best_x;
  fail(Errc::NoConvergence, std::string(what) + ": bisection stalled, residual " +
                                std::to_string(best_f));
}

// A few Newton steps to sharpen a root estimate; falls back to the input if
// the iteration leaves [lo, hi] or stops improving.
template <class F, class DF>
double newton_polish(F&& f, DF&& df, double x0, double lo, double hi, double ftol,
                     int max_iter = 30) {
  double x = x0;
  double fx = f(x);
  double best_x = x;
  double best_f = std::abs(fx);
  for (int i = 0; i < max_iter && best_f > ftol; ++i) {
    const double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - fx / d;
    if (!(next >= lo && next <= hi)) break;
    x = next;
    fx = f(x);
    if (std::abs(fx) < best_f) {
      best_f = std::abs(fx);
      best_x = x;
    } else {
      break;
    }
  }
  return best_x;
}

}  // namespace aoi::num
