#pragma once

#include <cmath>
#include <cstddef>

#include "aoi/errors.hpp"

namespace aoi::num {

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
inline constexpr double kXgk[8] = {
    0.99145537112081263920685469752633, 0.94910791234275852452618968404785,
    0.86486442335976907278971278864093, 0.74153118559939443986386477328079,
    0.58608723546769113029414483825873, 0.40584515137739716690660641207696,
    0.20778495500789846760068940377324, 0.0};
inline constexpr double kWgk[8] = {
    0.02293532201052922496373200805897, 0.06309209262997855329070066318921,
    0.10479001032225018383987632254152, 0.14065325971552591874518959051024,
    0.16900472663926790282658342659855, 0.19035057806478540991325640242101,
    0.20443294007529889241416199923465, 0.20948214108472782801299917489171};
inline constexpr double kWg[4] = {
    0.12948496616886969327061143267908, 0.27970539148927666790146777142378,
    0.38183005050511894495036977548898, 0.41795918367346938775510204081633};

template <class F>
void gk15(F&& f, double a, double b, double& value, double& error) {
  const double c = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = fc * kWg[3];
  double kron = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = half * kXgk[j];
    const double fsum = f(c - x) + f(c + x);
    kron += fsum * kWgk[j];
    if (j % 2 == 1) gauss += fsum * kWg[j / 2];
  }
  value = kron * half;
  error = std::abs((kron - gauss) * half);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a, b]. Subdivides the worst
// interval estimate recursively until the local error is within the budget
// proportional to the interval length; depth-capped to avoid runaway
// recursion on pathological integrands.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 1e-300, int max_depth = 48) {
  if (a == b) return 0.0;
  double whole, err;
  detail::gk15(f, a, b, whole, err);
  struct Frame {
    double a, b, value, error;
    int depth;
  };
  // Explicit stack; worst-first is unnecessary since we fully refine.
  Frame stack[2048];
  int top = 0;
  stack[top++] = {a, b, whole, err, 0};
  double total = 0.0;
  const double span = std::abs(b - a);
  double scale = std::abs(whole);
  while (top > 0) {
    Frame fr = stack[--top];
    const double budget =
        std::max(abs_tol, rel_tol * std::max(scale, 1e-300)) * (std::abs(fr.b - fr.a) / span);
    if (fr.error <= budget || fr.depth >= max_depth || top >= 2040) {
      total += fr.value;
      continue;
    }
    const double mid = 0.5 * (fr.a + fr.b);
    double v1, e1, v2, e2;
    detail::gk15(f, fr.a, mid, v1, e1);
    detail::gk15(f, mid, fr.b, v2, e2);
    scale = std::max(scale, std::abs(total) + std::abs(v1) + std::abs(v2));
    stack[top++] = {fr.a, mid, v1, e1, fr.depth + 1};
    stack[top++] = {mid, fr.b, v2, e2, fr.depth + 1};
  }
  return total;
}

}  // namespace aoi::num
