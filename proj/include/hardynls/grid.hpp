/// \file grid.hpp
/// Radial grid builders.  The profile grid is geometric near the origin
/// (resolving the r^{-kappa} singular factor and the r^{-sigma} weight) and
/// uniform beyond r = 1, where the solution is smooth and exponentially
/// decaying.

#pragma once

#include <cmath>
#include <vector>

#include "error.hpp"

namespace hardynls {

/// Pure geometric grid from r_min to r_max with node ratio <= ratio.
inline std::vector<double> geometric_grid(double r_min, double r_max,
                                          double ratio) {
  require(r_min > 0.0 && r_max > r_min, Errc::InvalidArgument,
          "geometric_grid: need 0 < r_min < r_max");
  require(ratio > 1.0, Errc::InvalidArgument, "geometric_grid: ratio must be > 1");
  const int n = std::max(
      2, int(std::ceil(std::log(r_max / r_min) / std::log(ratio))) + 1);
  const double q = std::pow(r_max / r_min, 1.0 / double(n - 1));
  std::vector<double> r(n);
  for (int j = 0; j < n; ++j) r[j] = r_min * std::pow(q, j);
  r.front() = r_min;
  r.back() = r_max;
  return r;
}

/// Geometric from r_min to r_join, then uniform with spacing h to r_max.
inline std::vector<double> profile_grid(double r_min, double r_join,
                                        double r_max, double ratio, double h) {
  require(r_join > r_min && r_max > r_join, Errc::InvalidArgument,
          "profile_grid: need r_min < r_join < r_max");
  require(h > 0.0, Errc::InvalidArgument, "profile_grid: h must be > 0");
  std::vector<double> r = geometric_grid(r_min, r_join, ratio);
  const int m = std::max(1, int(std::ceil((r_max - r_join) / h)));
  const double hu = (r_max - r_join) / double(m);
  for (int j = 1; j <= m; ++j) r.push_back(r_join + hu * j);
  r.back() = r_max;
  return r;
}

/// Default profile grid used by the ground-state solver and CLI:
/// geometric 1e-6 -> 1 at ratio 1.02, uniform spacing 0.01 beyond.
inline std::vector<double> default_profile_grid(double r_max = 30.0) {
  return profile_grid(1e-6, 1.0, r_max, 1.02, 0.01);
}

}  // namespace hardynls
