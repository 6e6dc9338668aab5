/// \file ode.hpp
/// Outward integration of the regularized radial profile equation
///
///     v'' + (A/r) v' - v + r^{-sigma} v^{p-1} = 0,      A = d-1-2*kappa,
///
/// with an embedded Dormand-Prince 5(4) pair.  The singular origin is bridged
/// by a two-term series seed; termination events realize the shooting
/// dichotomy (ZeroCrossing vs TurnedUp); caller-requested radii are hit
/// exactly by step clamping (no interpolation error at stored nodes); and the
/// four norm integrands can be accumulated alongside the state so that norms
/// inherit integrator accuracy instead of grid-quadrature accuracy.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"
#include "fd.hpp"

namespace hardynls {

struct ProfileODE {
  double sigma = 0.0;  ///< power-weight exponent, 0 <= sigma < 2
  double p = 0.0;      ///< nonlinearity exponent
  double drift = 1.0;  ///< A = d-1-2*kappa; 1 at critical coupling, d-1 at c=0

  void validate() const {
    require(sigma >= 0.0 && sigma < 2.0, Errc::InvalidArgument,
            "ProfileODE: sigma must lie in [0, 2)");
    require(p > 2.0, Errc::InvalidArgument, "ProfileODE: p must be > 2");
    require(drift >= 1.0, Errc::InvalidArgument,
            "ProfileODE: drift A must be >= 1 (c in [0, c_*], d >= 3)");
  }
};

struct SeedState {
  double r = 0.0, v = 0.0, dv = 0.0;
};

/// Odd extension of the power nonlinearity, finite for transient v <= 0.
inline double pow_signed(double v, double e) {
  return v >= 0.0 ? std::pow(v, e) : -std::pow(-v, e);
}

/// Two-term expansion about the origin:
///   v(r)  = v0 + v0 r^2 / (2(A+1)) - v0^{p-1} r^{2-sigma} / ((2-sigma)(A+1-sigma))
///   v'(r) = v0 r / (A+1)           - v0^{p-1} r^{1-sigma} / (A+1-sigma)
/// (reduces to the familiar v0 + v0 r^2/4 - v0^{p-1} r^{2-sigma}/(2-sigma)^2
/// form at A = 1).
inline SeedState seed_series(const ProfileODE& ode, double v0, double r) {
  ode.validate();
  require(v0 > 0.0, Errc::InvalidArgument, "seed_series: v0 must be > 0");
  require(r > 0.0, Errc::InvalidArgument, "seed_series: r must be > 0");
  const double A = ode.drift, s = ode.sigma;
  const double vp = std::pow(v0, ode.p - 1.0);
  SeedState out;
  out.r = r;
  out.v = v0 + v0 * r * r / (2.0 * (A + 1.0)) -
          vp * std::pow(r, 2.0 - s) / ((2.0 - s) * (A + 1.0 - s));
  out.dv = v0 * r / (A + 1.0) - vp * std::pow(r, 1.0 - s) / (A + 1.0 - s);
  return out;
}

/// Largest r at which the two-term seed's own size bounds its truncation
/// below 1e-3 * tol * v0 (so the series error stays under the integrator
/// tolerance); clamped into [1e-9, 1e-2].
inline double auto_seed_radius(const ProfileODE& ode, double v0, double tol) {
  ode.validate();
  require(v0 > 0.0 && tol > 0.0, Errc::InvalidArgument,
          "auto_seed_radius: need v0 > 0 and tol > 0");
  const double A = ode.drift, s = ode.sigma;
  const double target = 1e-3 * tol;  // relative to v0
  const double r1 = std::sqrt(2.0 * (A + 1.0) * target);
  const double r2 = std::pow(
      (2.0 - s) * (A + 1.0 - s) * target * std::pow(v0, 2.0 - ode.p),
      1.0 / (2.0 - s));
  return std::clamp(std::min(r1, r2), 1e-9, 1e-2);
}

enum class StopFlag { ZeroCrossing, TurnedUp, ReachedRmax, StepFailure };

constexpr const char* stop_flag_name(StopFlag f) {
  switch (f) {
    case StopFlag::ZeroCrossing: return "ZeroCrossing";
    case StopFlag::TurnedUp:     return "TurnedUp";
    case StopFlag::ReachedRmax:  return "ReachedRmax";
    case StopFlag::StepFailure:  return "StepFailure";
  }
  return "?";
}

/// Norm integrals of a trajectory over [0, r_end], without the omega_d factor:
///   mass2 = int r^A v^2,  form = int r^A v'^2,
///   lp    = int r^{A-sigma} |v|^p,  gamma = int r^{A+2} v^2.
struct NormIntegrals {
  double mass2 = 0.0, form = 0.0, lp = 0.0, gamma = 0.0;
};

struct Trajectory {
  std::vector<double> r, v, dv;   ///< retained nodes, strictly increasing
  StopFlag flag = StopFlag::ReachedRmax;
  double r_end = 0.0;             ///< radius where integration stopped
  double r_seed = 0.0;            ///< series-to-integrator handoff radius
  NormIntegrals integrals;        ///< populated when accumulate was requested
  bool has_integrals = false;
  long n_steps = 0;               ///< accepted steps (diagnostic)
};

struct IntegrateOptions {
  double r_max = 30.0;
  double tol = 1e-10;        ///< relative error target per step
  double max_dr = 0.0;       ///< step cap; 0 = uncapped
  double stop_below = 0.0;   ///< >0: stop with ReachedRmax once v < this on the tail
  std::span<const double> sample_at{};  ///< exact output radii; empty = every step
  bool accumulate = false;   ///< integrate NormIntegrals alongside
  bool events = true;        ///< false: ignore the shooting dichotomy, run to r_max
  long max_steps = 5'000'000;  ///< accepted-step budget before NoConvergence
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b (5th order) minus b-hat (4th order): error estimator weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

// Cubic Hermite value on [r0, r1] given endpoint values and derivatives.
inline double hermite(double r0, double v0, double d0, double r1, double v1,
                      double d1, double r) {
  const double h = r1 - r0, t = (r - r0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * h * d1;
}

inline double hermite_deriv(double r0, double v0, double d0, double r1,
                            double v1, double d1, double r) {
  const double h = r1 - r0, t = (r - r0) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * v0 + (3 * t2 - 4 * t + 1) * h * d0 +
          (-6 * t2 + 6 * t) * v1 + (3 * t2 - 2 * t) * h * d1) /
         h;
}

}  // namespace detail

/// Integrates the profile equation outward from the series seed.
///
/// Termination: ZeroCrossing the first time v <= 0; TurnedUp the first time
/// v' > 0 with 0 < v < 1 at r >= 1 (for r >= 1 and v < 1 the flux (r^A v')'
/// is strictly positive, so such a trajectory can never return to the axis —
/// the v < 1 / r >= 1 guard keeps the initial plateau, where v' > 0 is
/// normal, from triggering a false undershoot); ReachedRmax at r_max or,
/// when stop_below > 0, at the tail radius where v first decays below it.
/// With events = false the dichotomy flags are ignored (diagnostic runs);
/// stop_below, when set, still terminates the tail.
inline Trajectory integrate(const ProfileODE& ode, double v0,
                            const IntegrateOptions& opt) {
  ode.validate();
  require(v0 > 0.0, Errc::InvalidArgument, "integrate: v0 must be > 0");
  require(opt.tol > 0.0, Errc::InvalidArgument, "integrate: tol must be > 0");
  require(opt.r_max > 0.0, Errc::InvalidArgument, "integrate: r_max must be > 0");

  const double A = ode.drift, s = ode.sigma, p = ode.p;
  const int nc = opt.accumulate ? 6 : 2;  // active components
  using State = std::array<double, 6>;

  auto rhs = [&](double r, const State& y, State& dy) {
    dy[0] = y[1];
    dy[1] = -(A / r) * y[1] + y[0] - std::pow(r, -s) * pow_signed(y[0], p - 1.0);
    if (nc == 6) {
      const double rA = std::pow(r, A);
      dy[2] = rA * y[0] * y[0];
      dy[3] = rA * y[1] * y[1];
      dy[4] = std::pow(r, A - s) * std::pow(std::abs(y[0]), p);
      dy[5] = rA * r * r * y[0] * y[0];
    }
  };

  Trajectory out;

  // --- seed ---------------------------------------------------------------
  double r_seed = auto_seed_radius(ode, v0, opt.tol);
  if (!opt.sample_at.empty()) {
    require(std::is_sorted(opt.sample_at.begin(), opt.sample_at.end()),
            Errc::InvalidArgument, "integrate: sample radii must be sorted");
    require(opt.sample_at.front() > 0.0, Errc::InvalidArgument,
            "integrate: sample radii must be positive");
  }
  r_seed = std::min(r_seed, 0.25 * opt.r_max);
  out.r_seed = r_seed;

  State y{}, k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{};
  {
    const SeedState seed = seed_series(ode, v0, r_seed);
    y[0] = seed.v;
    y[1] = seed.dv;
    if (opt.accumulate) {
      // Series integrals over [0, r_seed]; truncation O(r_seed^{A+3}) of the
      // leading sizes, far below the integrator tolerance budget.
      const double vp = std::pow(v0, p - 1.0);
      const double c1 = v0 / (A + 1.0), c2 = vp / (A + 1.0 - s);
      const double rs = r_seed;
      y[2] = v0 * v0 *
             (std::pow(rs, A + 1.0) / (A + 1.0) +
              std::pow(rs, A + 3.0) / ((A + 1.0) * (A + 3.0)) -
              2.0 * std::pow(v0, p - 2.0) * std::pow(rs, A + 3.0 - s) /
                  ((2.0 - s) * (A + 1.0 - s) * (A + 3.0 - s)));
      y[3] = c1 * c1 * std::pow(rs, A + 3.0) / (A + 3.0) -
             2.0 * c1 * c2 * std::pow(rs, A + 3.0 - s) / (A + 3.0 - s) +
             c2 * c2 * std::pow(rs, A + 3.0 - 2.0 * s) / (A + 3.0 - 2.0 * s);
      y[4] = std::pow(v0, p) * std::pow(rs, A + 1.0 - s) / (A + 1.0 - s);
      y[5] = v0 * v0 * std::pow(rs, A + 3.0) / (A + 3.0);
    }
  }

  // Caller samples at or below the seed radius come straight from the series.
  std::size_t next_sample = 0;
  auto push_node = [&](double r, double v, double dv) {
    out.r.push_back(r);
    out.v.push_back(v);
    out.dv.push_back(dv);
  };
  while (next_sample < opt.sample_at.size() &&
         opt.sample_at[next_sample] <= r_seed) {
    const SeedState ss = seed_series(ode, v0, opt.sample_at[next_sample]);
    push_node(ss.r, ss.v, ss.dv);
    ++next_sample;
  }
  if (opt.sample_at.empty()) push_node(r_seed, y[0], y[1]);

  // --- adaptive loop --------------------------------------------------------
  using D = detail::Dopri5;
  const double rtol = opt.tol;
  const double atol = opt.tol * std::max(v0, 1e-12);
  double r = r_seed;
  double h = 0.5 * r_seed;
  bool have_k1 = false;
  const double hard_cap = opt.max_dr > 0.0 ? opt.max_dr
                                           : std::numeric_limits<double>::max();

  auto finish = [&](StopFlag flag, double r_stop, double v_stop, double dv_stop,
                    bool push) {
    if (push) push_node(r_stop, v_stop, dv_stop);
    out.flag = flag;
    out.r_end = out.r.empty() ? r_stop : out.r.back();
    if (opt.accumulate) {
      out.integrals = {y[2], y[3], y[4], y[5]};
      out.has_integrals = true;
    }
  };

  while (true) {
    if (r >= opt.r_max * (1.0 - 1e-15)) {
      if (out.r.empty() || out.r.back() < r * (1.0 - 1e-15))
        push_node(r, y[0], y[1]);
      finish(StopFlag::ReachedRmax, r, y[0], y[1], false);
      return out;
    }
    double target = std::min(opt.r_max, r + std::min(h, hard_cap));
    bool forced_sample = false;
    if (next_sample < opt.sample_at.size() &&
        opt.sample_at[next_sample] <= target * (1.0 + 1e-15)) {
      target = opt.sample_at[next_sample];
      forced_sample = true;
    }
    double hs = target - r;
    if (hs <= r * 1e-14 + 1e-300) {
      // Degenerate clamp (duplicate sample radius); skip the sample.
      if (forced_sample) { ++next_sample; continue; }
      fail(Errc::StepFailure, "integrate: step underflow at r = " + std::to_string(r));
    }

    // One Dormand-Prince attempt from (r, y) with step hs.
    if (!have_k1) { rhs(r, y, k1); have_k1 = true; }
    State yt;
    auto stage = [&](double cc, const State& yy, State& kk) {
      (void)cc;
      rhs(r + cc * hs, yy, kk);
    };
    for (int i = 0; i < nc; ++i) yt[i] = y[i] + hs * D::a21 * k1[i];
    stage(D::c2, yt, k2);
    for (int i = 0; i < nc; ++i)
      yt[i] = y[i] + hs * (D::a31 * k1[i] + D::a32 * k2[i]);
    stage(D::c3, yt, k3);
    for (int i = 0; i < nc; ++i)
      yt[i] = y[i] + hs * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
    stage(D::c4, yt, k4);
    for (int i = 0; i < nc; ++i)
      yt[i] = y[i] + hs * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] +
                           D::a54 * k4[i]);
    stage(D::c5, yt, k5);
    for (int i = 0; i < nc; ++i)
      yt[i] = y[i] + hs * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                           D::a64 * k4[i] + D::a65 * k5[i]);
    stage(1.0, yt, k6);
    State ynew;
    for (int i = 0; i < nc; ++i)
      ynew[i] = y[i] + hs * (D::b1 * k1[i] + D::b3 * k3[i] + D::b4 * k4[i] +
                             D::b5 * k5[i] + D::b6 * k6[i]);
    rhs(r + hs, ynew, k7);

    double errnorm = 0.0;
    for (int i = 0; i < 2; ++i) {  // error control on (v, v') only
      const double err = hs * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] +
                               D::e5 * k5[i] + D::e6 * k6[i] + D::e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      errnorm = std::max(errnorm, std::abs(err) / sc);
    }

    if (errnorm > 1.0) {  // reject; shrink
      h = hs * std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
      if (h < r * 1e-14)
        fail(Errc::StepFailure,
             "integrate: step underflow at r = " + std::to_string(r));
      have_k1 = true;  // k1 still valid at unchanged (r, y)
      continue;
    }

    // Accept.
    const double r0 = r, v0n = y[0], dv0n = y[1];
    const double r1 = r + hs, v1n = ynew[0], dv1n = ynew[1];
    r = r1;
    y = ynew;
    k1 = k7;  // FSAL
    ++out.n_steps;
    // An over-tight tolerance drives the controller to the minimum step and
    // the trajectory storage with it; stop before memory does.
    require(out.n_steps <= opt.max_steps, Errc::NoConvergence,
            "integrate: accepted-step budget exhausted at r = " +
                std::to_string(r) + " (tolerance too tight for the scheme)");
    if (errnorm > 0.0)
      h = hs * std::clamp(0.9 * std::pow(errnorm, -0.2), 0.2, 5.0);
    else
      h = hs * 5.0;

    // Events, in priority order.  A single step can cross both the tail
    // threshold and zero; the threshold is reached first, so it wins.
    if (opt.stop_below > 0.0 && r1 >= 1.0 && dv1n < 0.0 &&
        v1n < opt.stop_below) {
      double lo = r0, hi = r1;
      for (int it = 0; it < 80 && (hi - lo) > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (detail::hermite(r0, v0n, dv0n, r1, v1n, dv1n, mid) > opt.stop_below
             ? lo : hi) = mid;
      }
      const double v_at = detail::hermite(r0, v0n, dv0n, r1, v1n, dv1n, hi);
      const double dv_at =
          detail::hermite_deriv(r0, v0n, dv0n, r1, v1n, dv1n, hi);
      // Roll the accumulators back across the discarded sliver [hi, r1] at
      // leading order so the totals end at r_end, not at the overshot node.
      if (opt.accumulate) {
        const double dr = r1 - hi;
        const double rm = 0.5 * (hi + r1), vm = 0.5 * (v_at + v1n),
                     dm = 0.5 * (dv_at + dv1n);
        const double rA = std::pow(rm, A);
        y[2] -= rA * vm * vm * dr;
        y[3] -= rA * dm * dm * dr;
        y[4] -= std::pow(rm, A - s) * std::pow(std::abs(vm), p) * dr;
        y[5] -= rA * rm * rm * vm * vm * dr;
      }
      finish(StopFlag::ReachedRmax, hi, v_at, dv_at, true);
      return out;
    }
    if (opt.events && v1n <= 0.0) {
      // Localize v = 0 by bisection on the cubic Hermite interpolant.
      double lo = r0, hi = r1;
      for (int it = 0; it < 80 && (hi - lo) > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (detail::hermite(r0, v0n, dv0n, r1, v1n, dv1n, mid) > 0.0 ? lo : hi) = mid;
      }
      finish(StopFlag::ZeroCrossing, hi, 0.0, dv1n, true);
      return out;
    }
    if (opt.events && r1 >= 1.0 && dv1n > 0.0 && v1n < 1.0) {
      finish(StopFlag::TurnedUp, r1, v1n, dv1n, true);
      return out;
    }

    if (forced_sample) {
      push_node(r1, v1n, dv1n);
      ++next_sample;
    } else if (opt.sample_at.empty()) {
      push_node(r1, v1n, dv1n);
    }
  }
}

/// Residual certificate: at every interior node (centered 5-point stencil
/// available), reconstruct v'' from the stored v' by finite differences and
/// evaluate |v'' + (A/r) v' - v + r^{-sigma} v^{p-1}| / max(1, |v|).
/// Boundary nodes are excluded: one-sided stencils lose two orders against
/// the r^{2-sigma} layer and would certify nothing.  Meaningful on
/// trajectories stored densely (forced samples or capped step), where the
/// centered FD reconstruction error is far below the integration error.
struct ResidualReport {
  double max_rel = 0.0;
  double at_r = 0.0;
};

inline ResidualReport ode_residual(const ProfileODE& ode, const Trajectory& t) {
  require(t.r.size() >= 5, Errc::GridTooCoarse,
          "ode_residual: need >= 5 nodes");
  ResidualReport rep;
  for (std::size_t i = 2; i + 2 < t.r.size(); ++i) {
    const double vpp = fd_derivative_at(t.r, t.dv, int(i));
    const double r = t.r[i];
    const double res = vpp + (ode.drift / r) * t.dv[i] - t.v[i] +
                       std::pow(r, -ode.sigma) * pow_signed(t.v[i], ode.p - 1.0);
    const double rel = std::abs(res) / std::max(1.0, std::abs(t.v[i]));
    if (rel > rep.max_rel) {
      rep.max_rel = rel;
      rep.at_r = r;
    }
  }
  return rep;
}

}  // namespace hardynls
