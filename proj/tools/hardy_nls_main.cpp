/// \file hardy_nls_main.cpp
/// Command-line front end.  Five subcommands:
///   ground-state  solve the profile and write r,v,Q plus a scalar summary
///   constant      the sharp interpolation constant and its cross-checks
///   verify        Pohozaev flux identity along the trajectory
///   evolve        Crank-Nicolson evolution driven by a key=value config
///   classify      global-existence / blow-up verdict for an initial datum
/// Exit codes: 0 success, 1 malformed request, 2 numerical failure.  All
/// output is deterministic (shortest round-trip floats, no timestamps).

#include <complex>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardynls/classify.hpp"
#include "hardynls/dynamics.hpp"
#include "hardynls/grid.hpp"
#include "hardynls/ground_state.hpp"
#include "hardynls/io.hpp"
#include "hardynls/pohozaev.hpp"

namespace {

using namespace hardynls;

/// Accepts "a/b" rationals (e.g. 10/3) as well as plain decimals.
double parse_power(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos)
    return parse_double(s, Errc::InvalidArgument, "power p");
  const double num = parse_double(s.substr(0, slash), Errc::InvalidArgument,
                                  "power p numerator");
  const double den = parse_double(s.substr(slash + 1), Errc::InvalidArgument,
                                  "power p denominator");
  require(den != 0.0, Errc::InvalidArgument, "power p: zero denominator");
  return num / den;
}

/// Accepts the literal "critical" (the Hardy threshold (d-2)^2/4) or a value.
double parse_coupling(const std::string& s, int d) {
  if (s == "critical") return hardy_critical_coupling(d);
  return parse_double(s, Errc::InvalidArgument, "coupling c");
}

void kv(const std::string& key, const std::string& value) {
  std::cout << key << ": " << value << "\n";
}
void kv(const std::string& key, double value) { kv(key, fmt(value)); }
void kv(const std::string& key, int value) { kv(key, fmt(value)); }
void kv(const std::string& key, bool value) {
  kv(key, std::string(value ? "true" : "false"));
}

void print_banner(const std::string& command, const ModelParams& mp) {
  std::cout << "hardy-nls " << version_string << "\n";
  kv("command", command);
  kv("d", mp.d);
  kv("p", mp.p);
  kv("c", mp.c);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  require(os.good(), Errc::IoError, "cannot write '" + path + "'");
  return os;
}

HeaderBlock model_header(const ModelParams& mp) {
  return {{"d", fmt(mp.d)}, {"p", fmt(mp.p)}, {"c", fmt(mp.c)}};
}

// ---------------------------------------------------------------- commands --

int run_ground_state(int d, const std::string& p_str, const std::string& c_str,
                     double tol, double r_max, const std::string& out) {
  const ModelParams mp{d, parse_power(p_str), parse_coupling(c_str, d)};
  ShootOptions so;
  require(tol > 0.0, Errc::InvalidArgument, "ground-state: tol must be > 0");
  so.bisect_tol = so.final_tol = tol;
  const GroundState gs = solve_ground_state(mp, so);

  print_banner("ground-state", mp);
  kv("kappa", gs.dc.kappa);
  kv("theta", gs.dc.theta);
  kv("v0", gs.v0);
  kv("bracket_lo", gs.bracket_lo);
  kv("bracket_hi", gs.bracket_hi);
  kv("bracket_width_rel", gs.bracket_width_rel);
  kv("bisect_iterations", gs.bisect_iterations);
  kv("r_switch", gs.r_switch);
  kv("mass", gs.mass);
  kv("mass_sq", gs.mass_sq);
  kv("form_norm_sq", gs.form_sq);
  kv("lp_p", gs.lp_p);
  kv("variance", gs.gamma);
  kv("energy", gs.energy);
  kv("residual_max_rel", gs.residual.max_rel);
  kv("residual_at_r", gs.residual.at_r);
  kv("err_mass_sq", gs.norm_errors.mass_sq);
  kv("err_form_sq", gs.norm_errors.form_sq);
  kv("err_lp_p", gs.norm_errors.lp_p);
  kv("err_variance", gs.norm_errors.gamma);
  const SharpConstant sc = sharp_constant(gs);
  kv("c_hgn", sc.value);
  if (sc.has_mass_critical_form)
    kv("c_hgn_mass_critical_form", sc.mass_critical_form);
  const ElScaling el = el_scaling(gs);
  kv("alpha", el.alpha);
  kv("beta", el.beta);
  kv("mass_roundtrip_rel", el.mass_roundtrip_rel);

  if (!out.empty()) {
    require(r_max > 1.0, Errc::InvalidArgument,
            "ground-state: rmax must be > 1");
    const std::vector<double> r = default_profile_grid(r_max);
    const std::vector<double> v = sample_v(gs, r);
    std::ofstream os = open_out(out);
    HeaderBlock hb = model_header(mp);
    hb.emplace_back("v0", fmt(gs.v0));
    hb.emplace_back("kappa", fmt(gs.dc.kappa));
    hb.emplace_back("columns", "r, v = r^kappa Q, Q");
    write_header(os, hb);
    os << "r,v,Q\n";
    for (std::size_t i = 0; i < r.size(); ++i)
      os << fmt(r[i]) << ',' << fmt(v[i]) << ','
         << fmt(v[i] * std::pow(r[i], -gs.dc.kappa)) << '\n';
    kv("profile_written", out);
  }
  return 0;
}

int run_constant(int d, const std::string& p_str, const std::string& c_str) {
  const ModelParams mp{d, parse_power(p_str), parse_coupling(c_str, d)};
  const GroundState gs = solve_ground_state(mp);
  const SharpConstant sc = sharp_constant(gs);

  print_banner("constant", mp);
  kv("theta", sc.theta);
  kv("ground_state_mass", sc.mass);
  kv("c_hgn", sc.value);
  if (sc.has_mass_critical_form) {
    kv("c_hgn_mass_critical_form", sc.mass_critical_form);
    kv("cross_check_rel",
       std::abs(sc.value - sc.mass_critical_form) / sc.value);
  }
  kv("quotient_at_ground_state", quotient_of(gs));
  return 0;
}

int run_verify(int d, const std::string& p_str, const std::string& c_str,
               const std::string& variant, double tol,
               const std::string& out) {
  const ModelParams mp{d, parse_power(p_str), parse_coupling(c_str, d)};
  require(variant == "consistent" || variant == "printed",
          Errc::InvalidArgument,
          "verify: --variant must be consistent or printed");
  require(tol > 0.0, Errc::InvalidArgument, "verify: tol must be > 0");
  const GroundState gs = solve_ground_state(mp);
  PohozaevOptions opt;
  opt.variant = variant == "printed" ? PohozaevVariant::AsPrinted
                                     : PohozaevVariant::ConsistentExponent;
  const PohozaevReport rep = verify_pohozaev(gs, opt);

  print_banner("verify", mp);
  kv("identity", std::string("pohozaev"));
  kv("variant", variant);
  kv("nodes", int(rep.r.size()));
  kv("max_rel_residual", rep.max_rel_residual);
  kv("at_r", rep.at_r);
  kv("fd_limited", rep.fd_limited);
  kv("j_positive", rep.j_positive);
  kv("j_decreasing", rep.j_decreasing);
  kv("j_first", rep.j_first);
  kv("j_last", rep.j_last);
  const bool pass = rep.max_rel_residual < tol;
  kv("tol", tol);
  kv("status", std::string(pass ? "Pass" : "Fail"));

  if (!out.empty()) {
    std::ofstream os = open_out(out);
    HeaderBlock hb = model_header(mp);
    hb.emplace_back("variant", variant);
    hb.emplace_back("columns", "r, J, G v^2, dJ/dr - G v^2");
    write_header(os, hb);
    os << "r,J,Gv2,residual\n";
    for (std::size_t i = 0; i < rep.r.size(); ++i)
      os << fmt(rep.r[i]) << ',' << fmt(rep.J[i]) << ',' << fmt(rep.Gv2[i])
         << ',' << fmt(rep.dJ[i] - rep.Gv2[i]) << '\n';
    kv("table_written", out);
  }
  return 0;
}

int run_evolve(const std::string& config_path) {
  Config cfg = Config::parse_file(config_path);
  const int d = cfg.get_int("d", 3);
  const ModelParams mp{d, parse_power(cfg.get_string("p")),
                       parse_coupling(cfg.get_string("c", "0"), d)};
  validate(mp);
  const double dr = cfg.get_double("dr", 1e-3);
  const double r_max = cfg.get_double("r_max", 20.0);

  EvolveOptions opt;
  opt.dt = cfg.get_double("dt", 1e-4);
  opt.t_end = cfg.get_double("t_end", 0.5);
  const double interval =
      cfg.get_double("output_interval", 100.0 * opt.dt);
  require(interval > 0.0, Errc::ConfigError,
          "evolve: output_interval must be > 0");
  opt.output_every = std::max(1, int(std::lround(interval / opt.dt)));
  opt.sweeps = cfg.get_int("sweeps", 2);
  opt.sponge_strength = cfg.get_double("sponge_strength", 10.0);
  opt.sponge_fraction = cfg.get_double("sponge_fraction", 0.1);
  opt.blowup_factor = cfg.get_double("blowup_factor", 1e6);

  const std::string initial = cfg.get_string("initial");
  const std::string out_series = cfg.get_string("out_series", "series.csv");
  const int snapshots = cfg.get_int("snapshots", 0);
  require(snapshots >= 0, Errc::ConfigError, "evolve: snapshots must be >= 0");
  const std::string snap_prefix =
      cfg.get_string("snapshot_prefix", snapshots > 0 ? "snapshot_" : "");
  cfg.finish();

  const WaveGrid g = wave_grid(mp, r_max, dr);

  // Initial datum: "ground", "exact-blowup:T,lambda,gamma", or "file:PATH".
  std::vector<Cplx> w0;
  if (initial == "ground") {
    const GroundState gs = solve_ground_state(mp);
    const std::vector<double> w = wave_from_ground_state(g, gs);
    w0.assign(w.begin(), w.end());
  } else if (initial.rfind("exact-blowup:", 0) == 0) {
    std::string rest = initial.substr(13);
    std::vector<double> arg;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      arg.push_back(parse_double(rest.substr(0, comma), Errc::ConfigError,
                                 "evolve: exact-blowup argument"));
      if (comma == std::string::npos) break;
      rest = rest.substr(comma + 1);
    }
    require(arg.size() == 3, Errc::ConfigError,
            "evolve: initial = exact-blowup:T,lambda,gamma needs 3 numbers");
    const GroundState gs = solve_ground_state(mp);
    w0 = exact_blowup_wave(g, gs, arg[0], arg[1], arg[2], 0.0);
  } else if (initial.rfind("file:", 0) == 0) {
    const RadialProfile u0 = read_profile_csv_file(initial.substr(5), mp.d);
    w0 = wave_from_profile(g, u0);
  } else {
    fail(Errc::ConfigError,
         "evolve: initial must be ground, exact-blowup:T,lambda,gamma, or "
         "file:PATH");
  }

  // Snapshot schedule: evenly spaced in [0, t_end], written at the first
  // diagnostic sample at or past each target (header records the actual t).
  std::vector<double> snap_times;
  for (int k = 0; k < snapshots; ++k)
    snap_times.push_back(snapshots == 1
                             ? opt.t_end
                             : opt.t_end * double(k) / double(snapshots - 1));
  std::size_t next_snap = 0;
  const auto dump_snapshot = [&](double t, std::span<const Cplx> w,
                                 std::size_t k) {
    std::ofstream os = open_out(snap_prefix + fmt(k) + ".csv");
    HeaderBlock hb = model_header(mp);
    hb.emplace_back("t", fmt(t));
    hb.emplace_back("columns", "r, Re u, Im u");
    write_header(os, hb);
    os << "r,re,im\n";
    for (std::size_t j = 0; j < g.n; ++j) {
      const Cplx u = w[j] * g.u_scale[j];
      os << fmt(g.r[j]) << ',' << fmt(u.real()) << ',' << fmt(u.imag())
         << '\n';
    }
  };
  opt.on_sample = [&](double t, std::span<const Cplx> w) {
    while (next_snap < snap_times.size() &&
           t >= snap_times[next_snap] - 0.5 * opt.dt) {
      dump_snapshot(t, w, next_snap);
      ++next_snap;
    }
  };

  const EvolutionState st = evolve(g, std::move(w0), opt);
  while (next_snap < snap_times.size()) {
    dump_snapshot(st.t, st.w, next_snap);  // run halted before the target
    ++next_snap;
  }

  {
    std::ofstream os = open_out(out_series);
    HeaderBlock hb = model_header(mp);
    hb.emplace_back("dr", fmt(dr));
    hb.emplace_back("r_max", fmt(r_max));
    hb.emplace_back("dt", fmt(opt.dt));
    hb.emplace_back("initial", initial);
    write_header(os, hb);
    os << "t,mass,energy,form_norm_sq,gamma,gamma_prime\n";
    for (const DiagnosticSample& s : st.samples)
      os << fmt(s.t) << ',' << fmt(std::sqrt(s.mass_sq)) << ','
         << fmt(s.energy) << ',' << fmt(s.form_sq) << ',' << fmt(s.gamma)
         << ',' << fmt(s.gamma_prime) << '\n';
  }

  print_banner("evolve", mp);
  kv("status", std::string(st.status == EvolveStatus::BlowupDetected
                               ? "BlowupDetected"
                               : "Completed"));
  kv("t_final", st.t);
  kv("steps", fmt(st.steps));
  kv("samples", int(st.samples.size()));
  kv("mass_initial", std::sqrt(st.mass0));
  kv("energy_initial", st.energy0);
  const double m_end = std::sqrt(st.samples.back().mass_sq);
  const double m_0 = std::sqrt(st.mass0);
  kv("mass_rel_drift", m_0 > 0.0 ? std::abs(m_end - m_0) / m_0 : 0.0);
  kv("max_nonlinear_residual", st.max_nonlinear_residual);
  kv("series_written", out_series);
  kv("snapshots_written", int(next_snap));
  return 0;
}

int run_classify(const std::string& profile_path, int d,
                 const std::string& p_str, const std::string& c_str,
                 bool finite_variance) {
  const ModelParams mp{d, parse_power(p_str), parse_coupling(c_str, d)};
  const RadialProfile u0 = read_profile_csv_file(profile_path, d);
  const GroundState gs = solve_ground_state(mp);
  const Classification cls = classify(u0, mp, gs, finite_variance);

  print_banner("classify", mp);
  kv("profile", profile_path);
  kv("samples", int(u0.r.size()));
  kv("finite_variance", cls.finite_variance);
  kv("mass", cls.mass);
  kv("ground_state_mass", gs.mass);
  kv("energy", cls.energy);
  kv("form_norm_sq", cls.form_sq);
  if (cls.threshold.has_value()) {
    const ThresholdData& td = *cls.threshold;
    kv("q", td.q);
    kv("c_hgn", td.c_hgn);
    kv("s0", td.s0);
    kv("f_at_s0", td.f_at_s0);
    kv("energy_mass_q", *cls.energy_mass_q);
    kv("form_mass_q", *cls.form_mass_q);
    kv("threshold_energy_mass_q", td.energy_mass_q);
    kv("threshold_form_mass_q", td.form_mass_q);
  }
  kv("verdict", std::string(to_string(cls.verdict)));
  kv("condition", std::string(to_string(cls.fired)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states, sharp constants, and blow-up dynamics of the "
               "focusing NLS with an inverse-square potential"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version_string));

  // Shared model flags (registered per subcommand so help stays local).
  struct ModelFlags {
    int d = 3;
    std::string p;
    std::string c = "critical";
  };
  const auto add_model_flags = [](CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--d", mf.d, "space dimension (>= 3)");
    cmd->add_option("--p", mf.p, "nonlinearity power, decimal or a/b")
        ->required();
    cmd->add_option("--c", mf.c,
                    "coupling in [0, (d-2)^2/4], or the word critical");
  };

  ModelFlags gs_mf;
  double gs_tol = 1e-12, gs_rmax = 30.0;
  std::string gs_out;
  CLI::App* cmd_gs =
      app.add_subcommand("ground-state", "solve the ground-state profile");
  add_model_flags(cmd_gs, gs_mf);
  cmd_gs->add_option("--tol", gs_tol, "shooting/certification tolerance");
  cmd_gs->add_option("--rmax", gs_rmax, "output grid extent");
  cmd_gs->add_option("--out", gs_out, "write the profile CSV (r,v,Q) here");

  ModelFlags ct_mf;
  CLI::App* cmd_ct =
      app.add_subcommand("constant", "sharp interpolation constant");
  add_model_flags(cmd_ct, ct_mf);

  ModelFlags vf_mf;
  bool vf_pohozaev = false;
  std::string vf_variant = "consistent", vf_out;
  double vf_tol = 1e-5;
  CLI::App* cmd_vf =
      app.add_subcommand("verify", "verify identities along the profile");
  add_model_flags(cmd_vf, vf_mf);
  cmd_vf->add_flag("--pohozaev", vf_pohozaev,
                   "check the flux identity dJ/dr = G v^2");
  cmd_vf->add_option("--variant", vf_variant,
                     "exponent variant: consistent or printed");
  cmd_vf->add_option("--tol", vf_tol, "Pass threshold on the max residual");
  cmd_vf->add_option("--out", vf_out, "write the table CSV here");

  std::string ev_config;
  CLI::App* cmd_ev =
      app.add_subcommand("evolve", "run the Crank-Nicolson evolution");
  cmd_ev->add_option("--config", ev_config, "key = value run configuration")
      ->required();

  ModelFlags cl_mf;
  std::string cl_profile;
  bool cl_fv = false;
  CLI::App* cmd_cl =
      app.add_subcommand("classify", "classify an initial datum");
  add_model_flags(cmd_cl, cl_mf);
  cmd_cl->add_option("--profile", cl_profile, "initial datum CSV (r,re[,im])")
      ->required();
  cmd_cl->add_flag("--finite-variance", cl_fv,
                   "assert |x| u0 is square-integrable (enables the blow-up "
                   "clauses)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_gs->parsed())
      return run_ground_state(gs_mf.d, gs_mf.p, gs_mf.c, gs_tol, gs_rmax,
                              gs_out);
    if (cmd_ct->parsed()) return run_constant(ct_mf.d, ct_mf.p, ct_mf.c);
    if (cmd_vf->parsed()) {
      hardynls::require(vf_pohozaev, hardynls::Errc::InvalidArgument,
                        "verify: --pohozaev is the only identity implemented");
      return run_verify(vf_mf.d, vf_mf.p, vf_mf.c, vf_variant, vf_tol, vf_out);
    }
    if (cmd_ev->parsed()) return run_evolve(ev_config);
    if (cmd_cl->parsed())
      return run_classify(cl_profile, cl_mf.d, cl_mf.p, cl_mf.c, cl_fv);
  } catch (const hardynls::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hardynls::is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;  // unreachable: a subcommand was required
}
