/// \file quad.hpp
/// Scalar quadrature helpers: adaptive Simpson for smooth one-dimensional
/// integrands (tail integrals, oracle cross-checks) and trapezoid weights for
/// stored grids.

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "error.hpp"

namespace hardynls {

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double fa, double b, double fb,
                   double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;  // Richardson extrapolation
  }
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction; tol is an absolute target.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol,
                        int max_depth = 48) {
  require(b >= a, Errc::InvalidArgument, "adaptive_simpson: b < a");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

/// Trapezoid weights on an arbitrary strictly increasing grid:
/// sum_j w_j f(r_j) ~= integral of f over [r_0, r_{n-1}].
inline std::vector<double> trapezoid_weights(std::span<const double> r) {
  const int n = int(r.size());
  require(n >= 2, Errc::InvalidArgument, "trapezoid_weights: need >= 2 nodes");
  std::vector<double> w(n, 0.0);
  for (int j = 0; j + 1 < n; ++j) {
    const double h = r[j + 1] - r[j];
    require(h > 0.0, Errc::NonMonotoneGrid, "grid not strictly increasing");
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

}  // namespace hardynls
