/// \file bessel_tail.hpp
/// Far-field closure of the profile equation.  Once the nonlinear term is
/// negligible, v'' + (A/r) v' - v = 0, whose decaying solution is
///   v(r) = C r^{(1-A)/2} K_nu(r),  nu = (A-1)/2,
/// a modified Bessel tail (for A = 2 this is the familiar e^{-r}/r up to the
/// sqrt(pi/2) factor).  Attaching it at a switch radius turns a truncated
/// trajectory into a profile with exact exponential decay, and the norm
/// integrals over [r_switch, infinity) are recovered by quadrature.

#pragma once

#include <cmath>

#include "hardynls/error.hpp"
#include "hardynls/ode.hpp"
#include "hardynls/quad.hpp"

namespace hardynls {

struct BesselTail {
  double nu = 0.0;        ///< (A-1)/2
  double alpha = 0.0;     ///< (1-A)/2, the prefactor exponent
  double C = 0.0;         ///< amplitude fitted at the switch radius
  double r_switch = 0.0;
  double slope_mismatch = 0.0;  ///< relative v' defect at the attach point

  double value(double r) const {
    return C * std::pow(r, alpha) * std::cyl_bessel_k(nu, r);
  }
  double derivative(double r) const {
    // K_nu' = -(K_{nu-1} + K_{nu+1})/2, with K_{-a} = K_a.
    const double K = std::cyl_bessel_k(nu, r);
    const double Kp = -0.5 * (std::cyl_bessel_k(std::abs(nu - 1.0), r) +
                              std::cyl_bessel_k(nu + 1.0, r));
    return C * std::pow(r, alpha) * (alpha * K / r + Kp);
  }
};

/// Fits the tail amplitude to the trajectory value at r_switch and records
/// the relative slope mismatch there (a certificate that the linearization
/// was valid; it shrinks with the attach value).
inline BesselTail fit_tail(const ProfileODE& ode, double r_switch, double v,
                           double dv) {
  require(r_switch > 1.0, Errc::InvalidArgument,
          "fit_tail: switch radius too small");
  require(v > 0.0, Errc::InvalidArgument, "fit_tail: value must be positive");
  BesselTail t;
  t.nu = 0.5 * (ode.drift - 1.0);
  t.alpha = -t.nu;
  t.r_switch = r_switch;
  t.C = 1.0;
  t.C = v / t.value(r_switch);
  const double dv_tail = t.derivative(r_switch);
  t.slope_mismatch = std::abs(dv_tail - dv) / std::max(std::abs(dv), 1e-300);
  return t;
}

/// Norm integrals of the tail over [r_switch, infinity), without the omega_d
/// factor, in the same convention as Trajectory::integrals:
///   mass2 = int r^A v^2, form = int r^A v'^2,
///   lp = int r^{A-sigma} v^p, gamma = int r^{A+2} v^2.
/// The r^A weight cancels the prefactor: r^A v^2 = C^2 r K_nu(r)^2.
inline NormIntegrals tail_integrals(const ProfileODE& ode,
                                    const BesselTail& t) {
  const double a = t.r_switch;
  const double b = a + 42.0;  // K_nu^2 ~ e^{-2r}: truncation below 1e-36
  const double tol = 1e-15;
  NormIntegrals out;
  auto K = [&](double r) { return std::cyl_bessel_k(t.nu, r); };
  out.mass2 = t.C * t.C *
              adaptive_simpson([&](double r) { return r * K(r) * K(r); }, a, b,
                               tol * a * K(a) * K(a));
  out.gamma = t.C * t.C *
              adaptive_simpson(
                  [&](double r) { return r * r * r * K(r) * K(r); }, a, b,
                  tol * a * a * a * K(a) * K(a));
  out.form = adaptive_simpson(
      [&](double r) {
        const double dv = t.derivative(r);
        return std::pow(r, ode.drift) * dv * dv;
      },
      a, b, tol * std::pow(a, ode.drift) * t.derivative(a) * t.derivative(a));
  out.lp = adaptive_simpson(
      [&](double r) {
        return std::pow(r, ode.drift - ode.sigma) *
               std::pow(t.value(r), ode.p);
      },
      a, b,
      tol * std::pow(a, ode.drift - ode.sigma) * std::pow(t.value(a), ode.p));
  return out;
}

}  // namespace hardynls
