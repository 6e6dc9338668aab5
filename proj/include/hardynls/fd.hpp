/// \file fd.hpp
/// Finite-difference weights on arbitrary (non-uniform) stencils, computed
/// with Fornberg's recursion.  Used for identity residuals (reconstructing
/// derivatives from stored samples) rather than for any time stepping.

#pragma once

#include <span>
#include <vector>

#include "error.hpp"

namespace hardynls {

/// Weights w[k][j] such that f^{(k)}(x0) ~= sum_j w[k][j] f(x[j]) for
/// k = 0..max_order.  Requires x.size() > max_order; the approximation order
/// is x.size() - max_order for smooth f.
inline std::vector<std::vector<double>> fd_weights(double x0,
                                                   std::span<const double> x,
                                                   int max_order) {
  const int n = int(x.size());
  require(n > max_order, Errc::InvalidArgument,
          "fd_weights: need more nodes than the derivative order");
  // C[j][k]: weight of node j for derivative order k.
  std::vector<std::vector<double>> C(n, std::vector<double>(max_order + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  C[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C[i][k] = c1 * (k * C[i - 1][k - 1] - c5 * C[i - 1][k]) / c2;
        C[i][0] = -c1 * c5 * C[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        C[j][k] = (c4 * C[j][k] - k * C[j][k - 1]) / c3;
      C[j][0] = c4 * C[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<std::vector<double>> w(max_order + 1, std::vector<double>(n));
  for (int k = 0; k <= max_order; ++k)
    for (int j = 0; j < n; ++j) w[k][j] = C[j][k];
  return w;
}

/// First derivative at x[i] from the (2*half+1)-point neighborhood of i,
/// clamped one-sidedly at the segment ends.
inline double fd_derivative_at(std::span<const double> x,
                               std::span<const double> f, int i, int half = 2) {
  const int n = int(x.size());
  int lo = std::max(0, i - half);
  int hi = std::min(n - 1, i + half);
  if (hi - lo < 2 * half) {  // widen one-sidedly near the ends
    lo = std::max(0, hi - 2 * half);
    hi = std::min(n - 1, lo + 2 * half);
  }
  const auto w = fd_weights(x[i], x.subspan(lo, hi - lo + 1), 1);
  double der = 0.0;
  for (int j = lo; j <= hi; ++j) der += w[1][j - lo] * f[j];
  return der;
}

}  // namespace hardynls
