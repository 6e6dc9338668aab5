/// \file classify.hpp
/// Global-existence / blow-up classification of radial initial data by the
/// mass-energy thresholds, together with the threshold function
///   f(s) = s/2 - s^{p theta/2} / (p C_HGN^p)
/// and its stationary point s_0 = (C_HGN^p / theta)^{2/(p theta - 2)}.
/// C_HGN is the sharp interpolation constant in the quotient normalization
///   ||u||_p <= (1/C_HGN) <u,Hu>^{theta/2} ||u||_2^{1-theta},
/// i.e. the infimum of the quotient attained at the ground state, so that
/// s_0 = <Q,HQ> ||Q||_2^q and f(s_0) = E(Q) ||Q||_2^q exactly (both follow
/// from the Nehari and Derrick relations).

#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "error.hpp"
#include "ground_state.hpp"
#include "profile.hpp"

namespace hardynls {

enum class Verdict { Global, BlowUp, Indeterminate };

/// Which clause of the dichotomy decided the verdict.
enum class FiredCondition {
  None,                  ///< no clause applied (Indeterminate)
  SubcriticalP,          ///< p < 2 + 4/d: every datum is global
  MassBelowGroundState,  ///< p = 2 + 4/d and ||u0||_2 < ||Q||_2
  EnergyMassProduct,     ///< p > 2 + 4/d, E M^q and T M^q both below threshold
  NegativeEnergy,        ///< p >= 2 + 4/d, finite variance, E(u0) < 0
  AboveThreshold,        ///< p > 2 + 4/d, finite variance, T M^q above s_0
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Global: return "Global";
    case Verdict::BlowUp: return "BlowUp";
    default: return "Indeterminate";
  }
}

inline const char* to_string(FiredCondition c) {
  switch (c) {
    case FiredCondition::SubcriticalP: return "SubcriticalP";
    case FiredCondition::MassBelowGroundState: return "MassBelowGroundState";
    case FiredCondition::EnergyMassProduct: return "EnergyMassProduct";
    case FiredCondition::NegativeEnergy: return "NegativeEnergy";
    case FiredCondition::AboveThreshold: return "AboveThreshold";
    default: return "None";
  }
}

/// Threshold quantities for the mass-supercritical regime (p > 2 + 4/d; the
/// exponent q and the stationary point of f exist only there).
struct ThresholdData {
  double q = 0.0;         ///< (4d + 4p - 2pd)/(dp - 2d - 4)
  double theta = 0.0;     ///< d/2 - d/p
  double p = 0.0;
  double c_hgn = 0.0;     ///< sharp quotient constant (from the mass formula)
  double s0 = 0.0;        ///< (C^p/theta)^{2/(p theta - 2)}
  double f_at_s0 = 0.0;   ///< f(s0), the energy-mass threshold value
  double form_mass_q = 0.0;    ///< <Q,HQ> ||Q||_2^q (equals s0 in exact arith.)
  double energy_mass_q = 0.0;  ///< E(Q) ||Q||_2^q (equals f(s0) likewise)
};

/// f(s) = s/2 - s^{p theta/2}/(p C^p).  Pre: s >= 0.
inline double eval_f(const ThresholdData& td, double s) {
  return 0.5 * s - std::pow(s, 0.5 * td.p * td.theta) /
                       (td.p * std::pow(td.c_hgn, td.p));
}

inline ThresholdData threshold_data(const GroundState& gs) {
  require(gs.dc.q.has_value(), Errc::InvalidArgument,
          "threshold_data: q and s0 exist only for p > 2 + 4/d");
  ThresholdData td;
  td.q = *gs.dc.q;
  td.theta = gs.dc.theta;
  td.p = gs.params.p;
  td.c_hgn = sharp_constant(gs).value;
  const double ptheta = td.p * td.theta;
  td.s0 = std::pow(std::pow(td.c_hgn, td.p) / td.theta, 2.0 / (ptheta - 2.0));
  td.f_at_s0 = eval_f(td, td.s0);
  const double mq = std::pow(gs.mass, td.q);
  td.form_mass_q = gs.form_sq * mq;
  td.energy_mass_q = gs.energy * mq;
  return td;
}

struct Classification {
  Verdict verdict = Verdict::Indeterminate;
  FiredCondition fired = FiredCondition::None;
  double mass = 0.0;      ///< ||u0||_2
  double energy = 0.0;    ///< E(u0)
  double form_sq = 0.0;   ///< <u0, H u0> (Friedrichs form)
  bool finite_variance = false;
  /// E(u0) ||u0||_2^q and <u0,Hu0> ||u0||_2^q; set when p > 2 + 4/d.
  std::optional<double> energy_mass_q, form_mass_q;
  std::optional<ThresholdData> threshold;
};

namespace detail {
/// The thresholds are sharp at equality (the minimal-mass blow-up solution
/// sits exactly on them), so strict comparisons are taken outside a relative
/// quadrature window: a datum within the window of the threshold never fires
/// a clause.
constexpr double kEqualityBand = 1e-6;
inline bool strictly_below(double a, double b, double scale) {
  return a < b - kEqualityBand * std::abs(scale);
}
inline bool strictly_above(double a, double b, double scale) {
  return a > b + kEqualityBand * std::abs(scale);
}
}  // namespace detail

/// Applies the dichotomy clauses in order; if no clause fires the verdict is
/// Indeterminate.  The blow-up clauses require the caller to assert finite
/// variance (|x| u0 in L^2), which a sampled profile cannot certify.
inline Classification classify(const RadialProfile& u0, const ModelParams& mp,
                               const GroundState& gs,
                               bool has_finite_variance) {
  validate(u0);
  validate(mp);
  require(mp.d == gs.params.d && mp.p == gs.params.p && mp.c == gs.params.c,
          Errc::ParamsMismatch,
          "classify: params do not match the ground state's");
  require(u0.d == mp.d, Errc::ParamsMismatch,
          "classify: profile dimension does not match params");

  Classification out;
  out.finite_variance = has_finite_variance;
  out.mass = std::sqrt(mass_sq(u0));
  out.form_sq = form_norm_sq(u0, gs.dc.kappa);
  out.energy = energy(u0, mp);

  const bool mc = gs.dc.mass_critical;
  const bool supercritical = gs.dc.q.has_value();
  if (supercritical) {
    out.threshold = threshold_data(gs);
    const double mq = std::pow(out.mass, out.threshold->q);
    out.energy_mass_q = out.energy * mq;
    out.form_mass_q = out.form_sq * mq;
  }

  // (ii).1  p < 2 + 4/d: global for every datum.
  if (!mc && !supercritical) {
    out.verdict = Verdict::Global;
    out.fired = FiredCondition::SubcriticalP;
    return out;
  }
  // (ii).2  mass-critical below the ground-state mass.
  if (mc && detail::strictly_below(out.mass, gs.mass, gs.mass)) {
    out.verdict = Verdict::Global;
    out.fired = FiredCondition::MassBelowGroundState;
    return out;
  }
  // (ii).3  supercritical, both products below threshold.
  const auto energy_condition = [&] {
    return detail::strictly_below(*out.energy_mass_q,
                                  out.threshold->energy_mass_q,
                                  out.threshold->energy_mass_q);
  };
  if (supercritical && energy_condition() &&
      detail::strictly_below(*out.form_mass_q, out.threshold->s0,
                             out.threshold->s0)) {
    out.verdict = Verdict::Global;
    out.fired = FiredCondition::EnergyMassProduct;
    return out;
  }
  // (iii).1  negative energy with finite variance (p >= 2 + 4/d).  The
  // energy is a difference of two positive functionals, so the equality
  // band is taken relative to the form (the scale of the cancellation).
  if ((mc || supercritical) && has_finite_variance &&
      detail::strictly_below(out.energy, 0.0, out.form_sq)) {
    out.verdict = Verdict::BlowUp;
    out.fired = FiredCondition::NegativeEnergy;
    return out;
  }
  // (iii).2  supercritical, energy condition, form product above s0.
  if (supercritical && has_finite_variance && energy_condition() &&
      detail::strictly_above(*out.form_mass_q, out.threshold->s0,
                             out.threshold->s0)) {
    out.verdict = Verdict::BlowUp;
    out.fired = FiredCondition::AboveThreshold;
    return out;
  }
  return out;  // Indeterminate, fired = None
}

}  // namespace hardynls
