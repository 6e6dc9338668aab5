/// \file params.hpp
/// Model parameters and every derived constant used across the library.
///
/// Model:  i u_t = (-Delta - c |x|^{-2}) u - |u|^{p-2} u   on R^d,  d >= 3,
/// with 2 < p < 2d/(d-2) and Hardy coupling 0 <= c <= c_* = (d-2)^2/4.
///
/// The stationary profile Q (H Q + Q = Q^{p-1}, mu = -1 normalization) is
/// regularized through v(r) = r^kappa Q(r), which turns the singular radial
/// equation into
///     v'' + (A/r) v' - v + r^{-sigma} v^{p-1} = 0,
/// with kappa = (d-2)/2 - sqrt((d-2)^2/4 - c),  sigma = kappa (p-2),  and
/// drift A = d-1-2 kappa.  At c = c_* this gives A = 1 and
/// sigma = (d-2)(p-2)/2; at c = 0 it reduces to the classical radial equation
/// (kappa = 0, A = d-1, sigma = 0).

#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "error.hpp"

namespace hardynls {

/// Surface measure of the unit sphere S^{d-1}:  2 pi^{d/2} / Gamma(d/2).
inline double omega_d(int d) {
  return 2.0 * std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d);
}

inline double hardy_critical_coupling(int d) {
  return 0.25 * double(d - 2) * double(d - 2);
}

/// L^2-critical nonlinearity exponent p = 2 + 4/d.
inline double mass_critical_exponent(int d) {
  require(d >= 3, Errc::InvalidDimension, "d must be >= 3");
  return 2.0 + 4.0 / double(d);
}

struct ModelParams {
  int d = 3;        ///< spatial dimension, >= 3
  double p = 0.0;   ///< nonlinearity exponent, 2 < p < 2d/(d-2)
  double c = 0.0;   ///< Hardy coupling, 0 <= c <= c_* (c_* = critical case)
};

struct DerivedConstants {
  double c_star = 0.0;           ///< (d-2)^2/4
  double theta = 0.0;            ///< d/2 - d/p, in (0,1)
  double kappa = 0.0;            ///< (d-2)/2 - sqrt((d-2)^2/4 - c)
  double sigma = 0.0;            ///< kappa (p-2), the v-equation weight exponent
  double drift = 0.0;            ///< A = d-1-2 kappa, the v-equation drift
  double mass_critical_p = 0.0;  ///< 2 + 4/d
  std::optional<double> q;       ///< (4d+4p-2pd)/(dp-2d-4), only for p > 2+4/d
  bool mass_critical = false;    ///< p == 2 + 4/d  (theta p == 2)
  bool critical_coupling = false;  ///< c == c_*
};

namespace detail {
// Exact-equality intent realized with a 1e-12 relative band; p and c arrive
// through decimal parsing so bitwise comparison would be too brittle.
inline bool nearly(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1.0});
}
}  // namespace detail

inline void validate(const ModelParams& mp) {
  require(mp.d >= 3, Errc::InvalidDimension, "d must be >= 3");
  const double p_max = 2.0 * mp.d / double(mp.d - 2);
  require(mp.p > 2.0 && mp.p < p_max, Errc::InvalidPower,
          "p must lie in (2, 2d/(d-2)) = (2, " + std::to_string(p_max) + ")");
  const double cs = hardy_critical_coupling(mp.d);
  require(mp.c >= 0.0, Errc::InvalidCoupling, "coupling c must be >= 0");
  require(mp.c <= cs * (1.0 + 1e-12), Errc::InvalidCoupling,
          "coupling c must be <= c_* = " + std::to_string(cs));
}

inline DerivedConstants derive_constants(const ModelParams& mp) {
  validate(mp);
  DerivedConstants dc;
  dc.c_star = hardy_critical_coupling(mp.d);
  dc.theta = 0.5 * mp.d - mp.d / mp.p;
  const double disc = std::max(0.0, dc.c_star - mp.c);  // >= 0 post-validate
  dc.kappa = 0.5 * (mp.d - 2) - std::sqrt(disc);
  dc.sigma = dc.kappa * (mp.p - 2.0);
  dc.drift = mp.d - 1.0 - 2.0 * dc.kappa;
  dc.mass_critical_p = 2.0 + 4.0 / double(mp.d);
  dc.mass_critical = detail::nearly(dc.theta * mp.p, 2.0);
  dc.critical_coupling = detail::nearly(mp.c, dc.c_star);
  if (!dc.mass_critical && mp.p > dc.mass_critical_p) {
    dc.q = (4.0 * mp.d + 4.0 * mp.p - 2.0 * mp.p * mp.d) /
           (mp.d * mp.p - 2.0 * mp.d - 4.0);
  }
  return dc;
}

/// Coefficient of the 1/r^2 term after the half-line substitution
/// w = r^{(d-1)/2} u:  C2 = (d-1)(d-3)/4 - c.  Equals -1/4 whenever c = c_*.
inline double effective_inverse_square_coefficient(const ModelParams& mp) {
  validate(mp);
  return 0.25 * double(mp.d - 1) * double(mp.d - 3) - mp.c;
}

/// Exponent rho with w ~ r^rho near the origin for the regular (limit-point
/// selected) branch:  rho = (d-1)/2 - kappa; note rho(rho-1) = C2.
inline double singular_branch_exponent(const ModelParams& mp) {
  return 0.5 * (mp.d - 1) - derive_constants(mp).kappa;
}

/// Parses an exponent token: plain decimal ("3.5") or a fraction ("10/3").
inline double parse_exponent(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double value = std::stod(text, &used);
      require(used == text.size(), Errc::InvalidArgument,
              "trailing characters in exponent '" + text + "'");
      return value;
    }
    const std::string num = text.substr(0, slash);
    const std::string den = text.substr(slash + 1);
    const double a = std::stod(num, &used);
    require(used == num.size(), Errc::InvalidArgument,
            "bad numerator in '" + text + "'");
    const double b = std::stod(den, &used);
    require(used == den.size(), Errc::InvalidArgument,
            "bad denominator in '" + text + "'");
    require(b != 0.0, Errc::InvalidArgument, "zero denominator in '" + text + "'");
    return a / b;
  } catch (const std::invalid_argument&) {
    fail(Errc::InvalidArgument, "unparseable exponent '" + text + "'");
  } catch (const std::out_of_range&) {
    fail(Errc::InvalidArgument, "exponent out of range '" + text + "'");
  }
}

/// Parses a coupling token: decimal, fraction, or the literal "critical"
/// (mapped to c_*(d)).
inline double parse_coupling(const std::string& text, int d) {
  if (text == "critical") return hardy_critical_coupling(d);
  return parse_exponent(text);
}

}  // namespace hardynls
