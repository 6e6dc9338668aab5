/// \file ground_state.hpp
/// Ground-state computation by shooting on the regularized profile
/// v(r) = r^kappa Q(r).  The termination flags of the outward integration
/// realize the overshoot/undershoot dichotomy, bisection pins the critical
/// amplitude v(0) to machine width, and a modified-Bessel tail is attached
/// where the profile has decayed far into the linear regime.  Norms come
/// from integrator-accurate accumulators plus closed-form tail quadrature;
/// a finite-difference residual pass certifies the result.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "hardynls/bessel_tail.hpp"
#include "hardynls/error.hpp"
#include "hardynls/ode.hpp"
#include "hardynls/parallel.hpp"
#include "hardynls/params.hpp"
#include "hardynls/profile.hpp"

namespace hardynls {

struct ShootOptions {
  double r_max = 45.0;            ///< dichotomy horizon for free runs
  double bisect_tol = 1e-12;      ///< integrator tolerance during bisection
  double final_tol = 1e-12;       ///< tolerance of the certification passes
  double attach_threshold = 1e-5; ///< tail attach once v < threshold * v0
  double v0_lo = 0.0;             ///< explicit bracket; 0 = auto-bracket
  double v0_hi = 0.0;
};

struct NormErrors {
  double mass_sq = 0.0, form_sq = 0.0, lp_p = 0.0, gamma = 0.0;  ///< relative
};

struct GroundState {
  ModelParams params;
  DerivedConstants dc;
  double v0 = 0.0;             ///< critical amplitude of v at the origin
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double bracket_width_rel = 0.0;
  int bisect_iterations = 0;

  double r_switch = 0.0;       ///< tail attach radius
  double v_at_switch = 0.0, dv_at_switch = 0.0;
  BesselTail tail;

  // Norms with the omega_d factor included.
  double mass = 0.0;           ///< ||Q||_2
  double mass_sq = 0.0;        ///< ||Q||_2^2
  double form_sq = 0.0;        ///< T = ||grad Q||^2 - c ||Q/r||^2 (Friedrichs)
  double lp_p = 0.0;           ///< ||Q||_p^p
  double gamma = 0.0;          ///< int r^2 Q^2
  double energy = 0.0;         ///< E(Q) = T/2 - ||Q||_p^p / p
  NormErrors norm_errors;      ///< tolerance-refinement error estimates

  ResidualReport residual;    ///< FD certification of the profile equation
};

inline ProfileODE profile_ode(const DerivedConstants& dc, double p) {
  return ProfileODE{dc.sigma, p, dc.drift};
}

/// One free integration classified by its termination flag.
inline StopFlag classify_shot(const ProfileODE& ode, double v0, double r_max,
                              double tol) {
  IntegrateOptions opt;
  opt.r_max = r_max;
  opt.tol = tol;
  return integrate(ode, v0, opt).flag;
}

/// Widens a positive guess into a (TurnedUp, ZeroCrossing) bracket by
/// decades.  An unclassified probe (for sigma = 0 the amplitude v0 = 1 is a
/// constant equilibrium and never moves) just steps onward; the decade caps
/// turn a systematically unclassifiable family into BracketInvalid.
inline std::pair<double, double> auto_bracket(const ProfileODE& ode,
                                              double guess, double r_max,
                                              double tol) {
  require(guess > 0.0, Errc::InvalidArgument, "auto_bracket: guess must be > 0");
  double lo = guess, hi = guess;
  while (classify_shot(ode, lo, r_max, tol) != StopFlag::TurnedUp) {
    lo *= 0.1;
    require(lo >= 1e-8, Errc::BracketInvalid,
            "auto_bracket: no undershoot above v0 = 1e-8");
  }
  while (classify_shot(ode, hi, r_max, tol) != StopFlag::ZeroCrossing) {
    hi *= 10.0;
    require(hi <= 1e8, Errc::BracketInvalid,
            "auto_bracket: no overshoot below v0 = 1e8");
  }
  return {lo, hi};
}

struct BisectResult {
  double v0 = 0.0, lo = 0.0, hi = 0.0;
  int iterations = 0;
};

/// Bisects a valid bracket down to machine width.
inline BisectResult bisect_profile(const ProfileODE& ode, double lo, double hi,
                                   double r_max, double tol) {
  require(0.0 < lo && lo < hi, Errc::BracketInvalid,
          "bisect: need 0 < lo < hi");
  const StopFlag flo = classify_shot(ode, lo, r_max, tol);
  const StopFlag fhi = classify_shot(ode, hi, r_max, tol);
  require(flo == StopFlag::TurnedUp, Errc::BracketInvalid,
          "bisect: lower endpoint does not undershoot (flag " +
              std::string(stop_flag_name(flo)) + ")");
  require(fhi == StopFlag::ZeroCrossing, Errc::BracketInvalid,
          "bisect: upper endpoint does not overshoot (flag " +
              std::string(stop_flag_name(fhi)) + ")");
  BisectResult res;
  const double eps = std::numeric_limits<double>::epsilon();
  while (hi - lo > 2.0 * eps * hi) {
    require(res.iterations++ < 200, Errc::NoConvergence,
            "bisect: bracket failed to collapse");
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // denormal-width bracket
    const StopFlag f = classify_shot(ode, mid, r_max, tol);
    if (f == StopFlag::ZeroCrossing)
      hi = mid;
    else if (f == StopFlag::TurnedUp)
      lo = mid;
    else
      fail(Errc::NoConvergence,
           "bisect: trajectory reached r_max unclassified at v0 = " +
               std::to_string(mid));
  }
  res.v0 = 0.5 * (lo + hi);
  res.lo = lo;
  res.hi = hi;
  return res;
}

namespace detail {

/// Certification sampling grid: ratio-controlled geometric section, then a
/// uniform section to r_hi.  The window is set by what centered FD can
/// actually certify in double precision: truncation against the r^{2-sigma}
/// layer scales like (ratio-1)^4 r^{-sigma}, while rounding scales like
/// eps |v'| / (r (ratio-1)); starting at 2e-4 with ratio 1.002 keeps both
/// below ~4e-9 across the admissible (sigma, drift) range.
inline std::vector<double> certification_grid(double r_lo, double r_hi) {
  std::vector<double> g;
  const double r_join = std::min(0.5, 0.5 * r_hi);
  for (double r = r_lo; r < r_join; r *= 1.002) g.push_back(r);
  const int n = int((r_hi - r_join) / 0.002);
  for (int i = 0; i <= n; ++i) g.push_back(r_join + (r_hi - r_join) * i / n);
  return g;
}

inline NormIntegrals accumulated_integrals(const ProfileODE& ode, double v0,
                                           double r_max, double tol,
                                           double stop_below, double* r_end,
                                           double* v_end, double* dv_end) {
  IntegrateOptions opt;
  opt.r_max = r_max;
  opt.tol = tol;
  opt.stop_below = stop_below;
  opt.accumulate = true;
  const Trajectory t = integrate(ode, v0, opt);
  require(t.flag == StopFlag::ReachedRmax, Errc::NoConvergence,
          "ground state: certification run terminated with flag " +
              std::string(stop_flag_name(t.flag)));
  *r_end = t.r_end;
  *v_end = t.v.back();
  *dv_end = t.dv.back();
  return t.integrals;
}

}  // namespace detail

/// Computes the ground state of the model.  The shooting variable is
/// v(0) = lim r^kappa Q(r); all reported norms include the omega_d factor.
inline GroundState solve_ground_state(const ModelParams& mp,
                                      const ShootOptions& opt = {}) {
  validate(mp);
  GroundState gs;
  gs.params = mp;
  gs.dc = derive_constants(mp);
  const ProfileODE ode = profile_ode(gs.dc, mp.p);

  // --- bracket and bisect ---------------------------------------------------
  double lo = opt.v0_lo, hi = opt.v0_hi;
  if (lo <= 0.0 || hi <= 0.0) {
    std::tie(lo, hi) = auto_bracket(ode, 1.0, opt.r_max, opt.bisect_tol);
  }
  const BisectResult bis =
      bisect_profile(ode, lo, hi, opt.r_max, opt.bisect_tol);
  gs.v0 = bis.v0;
  gs.bracket_lo = bis.lo;
  gs.bracket_hi = bis.hi;
  gs.bracket_width_rel = (bis.hi - bis.lo) / bis.v0;
  gs.bisect_iterations = bis.iterations;

  // --- integral pass + tail attach -------------------------------------------
  const double stop = opt.attach_threshold * gs.v0;
  NormIntegrals core = detail::accumulated_integrals(
      ode, gs.v0, opt.r_max, opt.final_tol, stop, &gs.r_switch,
      &gs.v_at_switch, &gs.dv_at_switch);
  gs.tail = fit_tail(ode, gs.r_switch, gs.v_at_switch, gs.dv_at_switch);
  const NormIntegrals tail_i = tail_integrals(ode, gs.tail);

  const double w = omega_d(mp.d);
  gs.mass_sq = w * (core.mass2 + tail_i.mass2);
  gs.form_sq = w * (core.form + tail_i.form);
  gs.lp_p = w * (core.lp + tail_i.lp);
  gs.gamma = w * (core.gamma + tail_i.gamma);
  gs.mass = std::sqrt(gs.mass_sq);
  gs.energy = 0.5 * gs.form_sq - gs.lp_p / mp.p;

  // --- error estimates: repeat the integral pass at a slacker tolerance ------
  {
    double re, ve, dve;
    const NormIntegrals coarse = detail::accumulated_integrals(
        ode, gs.v0, opt.r_max, opt.final_tol * 100.0, stop, &re, &ve, &dve);
    auto rel = [](double a, double b) {
      return std::abs(a - b) / std::max(std::abs(a), 1e-300);
    };
    gs.norm_errors.mass_sq = rel(core.mass2 + tail_i.mass2, coarse.mass2 + tail_i.mass2);
    gs.norm_errors.form_sq = rel(core.form + tail_i.form, coarse.form + tail_i.form);
    gs.norm_errors.lp_p = rel(core.lp + tail_i.lp, coarse.lp + tail_i.lp);
    gs.norm_errors.gamma = rel(core.gamma + tail_i.gamma, coarse.gamma + tail_i.gamma);
  }

  // --- FD residual certification ---------------------------------------------
  {
    const std::vector<double> grid =
        detail::certification_grid(2e-4, gs.r_switch);
    IntegrateOptions copt;
    copt.r_max = grid.back();
    copt.tol = opt.final_tol;
    copt.sample_at = grid;
    const Trajectory t = integrate(ode, gs.v0, copt);
    gs.residual = ode_residual(ode, t);
  }
  return gs;
}

/// Samples v on caller radii (integration below r_switch, tail above).
inline std::vector<double> sample_v(const GroundState& gs,
                                    std::span<const double> grid) {
  require(std::is_sorted(grid.begin(), grid.end()), Errc::NonMonotoneGrid,
          "sample_v: grid must be increasing");
  std::vector<double> v(grid.size());
  const ProfileODE ode = profile_ode(gs.dc, gs.params.p);
  std::vector<double> inner;
  for (double r : grid)
    if (r <= gs.r_switch) inner.push_back(r);
  if (!inner.empty()) {
    IntegrateOptions opt;
    opt.r_max = inner.back() * (1.0 + 1e-12);
    opt.tol = 1e-12;
    opt.sample_at = inner;
    opt.events = false;
    const Trajectory t = integrate(ode, gs.v0, opt);
    require(t.r.size() >= inner.size(), Errc::NoConvergence,
            "sample_v: sampling pass terminated early");
    for (std::size_t i = 0; i < inner.size(); ++i) v[i] = t.v[i];
  }
  for (std::size_t i = inner.size(); i < grid.size(); ++i)
    v[i] = gs.tail.value(grid[i]);
  return v;
}

/// Samples Q = r^{-kappa} v as a RadialProfile.
inline RadialProfile sample_ground_state(const GroundState& gs,
                                         std::span<const double> grid) {
  const std::vector<double> v = sample_v(gs, grid);
  RadialProfile u;
  u.d = gs.params.d;
  u.r.assign(grid.begin(), grid.end());
  u.val.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    u.val[i] = std::pow(grid[i], -gs.dc.kappa) * v[i];
  return u;
}

/// sup of r^m Q(r) over [r_lo, r_hi] (the tail-decay diagnostic).
inline double tail_sup(const GroundState& gs, double m, double r_lo,
                       double r_hi) {
  require(0.0 < r_lo && r_lo < r_hi, Errc::InvalidArgument,
          "tail_sup: need 0 < r_lo < r_hi");
  std::vector<double> grid;
  const int n = 400;
  for (int i = 0; i <= n; ++i) grid.push_back(r_lo + (r_hi - r_lo) * i / n);
  const std::vector<double> v = sample_v(gs, grid);
  double sup = 0.0;
  for (int i = 0; i <= n; ++i)
    sup = std::max(sup,
                   std::pow(grid[i], m - gs.dc.kappa) * std::abs(v[i]));
  return sup;
}

/// At critical coupling the drift is A = 1 in every dimension, so the mass
/// integral of u = r^{-kappa} v reduces to the planar-looking
///   ||u||_2^2 = omega_d int_0^inf r v(r)^2 dr
/// (for v = e^{-r}, d = 3 this gives pi).  Trapezoid on the given samples.
inline double mass_integral_critical(const ModelParams& mp,
                                     std::span<const double> r,
                                     std::span<const double> v) {
  validate(mp);
  const DerivedConstants dc = derive_constants(mp);
  require(dc.critical_coupling, Errc::InvalidCoupling,
          "mass_integral_critical: requires c = c_*");
  require(r.size() == v.size() && r.size() >= 2, Errc::InvalidArgument,
          "mass_integral_critical: bad sample arrays");
  double sum = r.front() * v.front() * v.front() * 0.5 * r.front();
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    require(r[i + 1] > r[i], Errc::NonMonotoneGrid,
            "mass_integral_critical: radii must increase");
    sum += 0.5 * (r[i + 1] - r[i]) *
           (r[i] * v[i] * v[i] + r[i + 1] * v[i + 1] * v[i + 1]);
  }
  return omega_d(mp.d) * sum;
}

/// The interpolation quotient of the computed ground state, from its
/// integrator-accurate norms.
inline double quotient_of(const GroundState& gs) {
  return std::pow(gs.form_sq, 0.5 * gs.dc.theta) *
         std::pow(gs.mass_sq, 0.5 * (1.0 - gs.dc.theta)) /
         std::pow(gs.lp_p, 1.0 / gs.params.p);
}

struct SharpConstant {
  double value = 0.0;        ///< the sharp constant from the mass formula
  double theta = 0.0;
  double mass = 0.0;         ///< ||Q||_2 used in the formula
  bool has_mass_critical_form = false;
  double mass_critical_form = 0.0;  ///< (d/(d+2))^{d/(2(d+2))} mass^{2/(d+2)}
};

/// Sharp constant from the ground-state mass:
///   C = mass^{(p-2)/p} (1-theta)^{1/p} (theta/(1-theta))^{d(p-2)/(4p)}.
inline SharpConstant sharp_constant(const GroundState& gs) {
  const double p = gs.params.p, d = gs.params.d, th = gs.dc.theta;
  SharpConstant sc;
  sc.theta = th;
  sc.mass = gs.mass;
  sc.value = std::pow(gs.mass, (p - 2.0) / p) * std::pow(1.0 - th, 1.0 / p) *
             std::pow(th / (1.0 - th), d * (p - 2.0) / (4.0 * p));
  if (gs.dc.mass_critical) {
    sc.has_mass_critical_form = true;
    sc.mass_critical_form = std::pow(d / (d + 2.0), d / (2.0 * (d + 2.0))) *
                            std::pow(gs.mass, 2.0 / (d + 2.0));
  }
  return sc;
}

/// Inverts the sharp-constant formula for the ground-state mass:
///   mass = C^{p/(p-2)} (1-theta)^{-1/(p-2)} (theta/(1-theta))^{-d/4}.
inline double mass_from_quotient(const ModelParams& mp, double quotient) {
  validate(mp);
  require(quotient > 0.0, Errc::InvalidArgument,
          "mass_from_quotient: quotient must be > 0");
  const DerivedConstants dc = derive_constants(mp);
  const double p = mp.p, th = dc.theta;
  return std::pow(quotient, p / (p - 2.0)) *
         std::pow(1.0 - th, -1.0 / (p - 2.0)) *
         std::pow(th / (1.0 - th), -mp.d / 4.0);
}

struct ElScaling {
  double alpha = 0.0;  ///< amplitude of the rescaled minimizer
  double beta = 0.0;   ///< length scale of the rescaled minimizer
  double mass_roundtrip_rel = 0.0;  ///< |beta^{d/2}/alpha - mass| / mass
};

/// Euler-Lagrange scaling data: the quotient minimizer normalized to the
/// canonical profile equation has alpha = (1-theta)^{1/(p-2)} C^{-p/(p-2)},
/// beta = sqrt((1-theta)/theta), and mass beta^{d/2}/alpha.
inline ElScaling el_scaling(const GroundState& gs) {
  const double p = gs.params.p, th = gs.dc.theta;
  const double C = sharp_constant(gs).value;
  ElScaling el;
  el.beta = std::sqrt((1.0 - th) / th);
  el.alpha = std::pow(1.0 - th, 1.0 / (p - 2.0)) * std::pow(C, -p / (p - 2.0));
  const double roundtrip = std::pow(el.beta, gs.params.d / 2.0) / el.alpha;
  el.mass_roundtrip_rel = std::abs(roundtrip - gs.mass) / gs.mass;
  return el;
}

/// Uniqueness probe: n independent auto-brackets from log-spaced random
/// guesses, each bisected to machine width.  Returns the n amplitudes (their
/// scatter is the uniqueness certificate).  Deterministic for a fixed seed.
inline std::vector<double> probe_uniqueness(const ModelParams& mp, int n,
                                            unsigned seed,
                                            const ShootOptions& opt = {}) {
  validate(mp);
  require(n >= 1, Errc::InvalidArgument, "probe_uniqueness: n must be >= 1");
  const DerivedConstants dc = derive_constants(mp);
  const ProfileODE ode = profile_ode(dc, mp.p);
  // Draw all guesses up front so the work items are independent.
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> decade(-2.0, 2.0);
  std::vector<double> guesses(n);
  for (auto& g : guesses) g = std::pow(10.0, decade(rng));
  std::vector<double> v0(n);
  parallel_for(std::size_t(n), [&](std::size_t i) {
    const auto [lo, hi] =
        auto_bracket(ode, guesses[i], opt.r_max, opt.bisect_tol);
    v0[i] = bisect_profile(ode, lo, hi, opt.r_max, opt.bisect_tol).v0;
  });
  return v0;
}

}  // namespace hardynls
