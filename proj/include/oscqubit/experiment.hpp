// Copyright 2026 The oscqubit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Config-driven runs.  One mode per config; each mode reads only its own
// parameter groups, so a key meant for another mode is reported as unknown.
//
// Exit codes: 0 ok, 2 config error, 3 numerical divergence, 4 a check failed.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oscqubit/analysis.hpp"
#include "oscqubit/appendix.hpp"
#include "oscqubit/core.hpp"
#include "oscqubit/ensemble.hpp"
#include "oscqubit/io.hpp"
#include "oscqubit/mechanics.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/redfield.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDivergence = 3, kCheckFailed = 4 };

inline constexpr std::array<const char*, 9> kModes = {
    "mechanics", "envelope", "ensemble", "redfield", "times", "appendix", "fig2", "fig3", "svea-check"};

/// Command-line overrides; unset fields leave the config value alone.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::filesystem::path> out;
};

namespace detail {

inline TLSParams read_tls(io::Config& c) {
  TLSParams p;
  p.Delta = c.get_double("tls.Delta", 1.0);
  p.eps0 = c.get_double("tls.eps0", 0.0);
  p.D = c.get_double("tls.D", 0.0);
  p.omega = c.get_double("tls.omega", 0.0);
  p.gamma = c.get_double("tls.gamma", 0.0);
  p.validate();
  return p;
}

inline OUParams read_noise(io::Config& c, std::uint64_t seed) {
  OUParams n{c.get_double("noise.G", 0.0), c.get_double("noise.tau_c", 0.0), seed};
  n.validate();
  return n;
}

inline Frame read_frame(io::Config& c, const std::string& key, Frame fallback) {
  const std::string s = c.get_string(key, fallback == Frame::bare ? "bare" : "diabatic");
  if (s == "bare") return Frame::bare;
  if (s == "diabatic") return Frame::diabatic;
  throw ConfigError(key + ": expected bare or diabatic, got '" + s + "'");
}

inline Picture read_picture(io::Config& c, const std::string& key, Picture fallback) {
  const std::string s = c.get_string(key, fallback == Picture::interaction ? "interaction" : "schrodinger");
  if (s == "schrodinger") return Picture::schrodinger;
  if (s == "interaction") return Picture::interaction;
  throw ConfigError(key + ": expected schrodinger or interaction, got '" + s + "'");
}

inline BlochVector read_initial(io::Config& c) {
  const BlochVector r(c.get_double("initial.x", 0.0), c.get_double("initial.y", 0.0),
                      c.get_double("initial.z", -1.0));
  if (!(r.norm() <= 1.0 + 1e-12)) throw ConfigError("initial Bloch vector must satisfy |r| <= 1");
  return r;
}

inline Kernel read_kernel(io::Config& c) {
  const std::string s = c.get_string("redfield.kernel", "markov");
  if (s == "markov") return Kernel::markov;
  if (s == "finite_time") return Kernel::finite_time;
  throw ConfigError("redfield.kernel: expected markov or finite_time, got '" + s + "'");
}

struct Grid {
  double dt;
  double T;
  std::size_t stride;
};

inline Grid read_grid(io::Config& c, double dt, double T) {
  Grid g{c.get_double("grid.dt", dt), c.get_double("grid.T", T), c.get_uint("grid.stride", 1)};
  if (!(g.dt > 0.0 && g.T > 0.0 && g.stride >= 1)) throw ConfigError("grid: dt, T > 0 and stride >= 1 required");
  return g;
}

inline std::string fmt(double v) { return io::format_double(v); }

// Everything a mode produces besides its CSV files.
struct Outcome {
  std::vector<std::pair<std::string, std::string>> meta;
  std::string report;  ///< plain text, also printed
  bool checks_passed = true;
};

inline std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

// ---------------------------------------------------------------------------
// Modes

inline Outcome run_mechanics(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                             std::uint64_t seed) {
  MechanicalParams mp;
  mp.m = c.get_double("mech.m", 1.0);
  mp.gamma = c.get_double("mech.gamma", 0.0);
  mp.k = c.get_double("mech.k", 1.0);
  mp.h = c.get_double("mech.h", 0.0);
  mp.eps0 = c.get_double("mech.eps0", 0.0);
  mp.D = c.get_double("mech.D", 0.0);
  mp.omega = c.get_double("mech.omega", 0.0);
  mp.validate();
  const double w0 = mp.omega0();
  const double dt = c.get_double("mech.dt", 2.0 * pi / (100.0 * w0));
  const double T = c.get_double("mech.T", 10.0);
  const std::size_t stride = c.get_uint("mech.stride", 1);
  const double cutoff = c.get_double("mech.cutoff", w0 / 10.0);
  MechState init{c.get_double("mech.x1", 1.0), c.get_double("mech.v1", 0.0), c.get_double("mech.x2", 0.0),
                 c.get_double("mech.v2", 0.0), 0.0};
  const OUParams noise = read_noise(c, seed);
  const double noise_dt = c.get_double("noise.dt", noise.white() ? dt : std::min(noise.tau_c / 10.0, 0.01));
  c.check_consumed();
  if (noise.G > 0.0 && noise.white())
    throw ConfigError("mechanics needs a continuous noise path: set noise.tau_c > 0");

  NoisePath path;
  if (noise.G > 0.0) path = sample_path(noise, noise_dt, detail::step_count(noise_dt, T) + 1);
  const auto series = integrate_mechanics(mp, noise.G > 0.0 ? &path : nullptr, init, dt, T, stride);
  io::write_mechanics_csv(dir / ("mechanics_" + tag + ".csv"), series);
  if (series.size() >= 4 && cutoff < w0)
    io::write_envelope_csv(dir / ("mechanics_" + tag + "_demod.csv"), demodulate(series, w0, cutoff));

  const MappedParams mapped = map_params(mp);
  Outcome out;
  std::ostringstream os;
  os << "omega0=" << fmt(w0) << " Delta=" << fmt(mapped.tls.Delta) << " underdamped=" << mp.underdamped()
     << " samples=" << series.size() << '\n';
  out.report = os.str();
  out.meta = {{"omega0", fmt(w0)}, {"Delta", fmt(mapped.tls.Delta)}};
  return out;
}

inline Outcome run_envelope(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                            std::uint64_t seed) {
  const TLSParams p = read_tls(c);
  const OUParams noise = read_noise(c, seed);
  const Grid g = read_grid(c, 0.01, 10.0);
  const BlochVector r0 = read_initial(c);
  const Frame in_frame = read_frame(c, "initial.frame", Frame::diabatic);
  const Frame frame = read_frame(c, "output.frame", Frame::diabatic);
  const Picture picture = read_picture(c, "output.picture", Picture::schrodinger);
  c.check_consumed();
  if (std::abs(r0.norm() - 1.0) > 1e-12)
    throw ConfigError("envelope mode integrates one pure state: |initial| must be 1 (use ensemble for mixed)");

  // Path i = 0 of the ensemble with the same seed, so the two modes agree.
  const OUParams path_params{noise.G, noise.tau_c, derive_seed(seed, 0)};
  const std::size_t steps = detail::step_count(g.dt, g.T);
  NoisePath path;
  if (noise.G > 0.0) path = sample_path(path_params, g.dt, noise.white() ? steps : steps + 1);
  BlochVector r_diab = in_frame == Frame::bare ? BlochVector(bloch_to_diabatic(p) * r0) : r0;
  const EnvelopeState s0{spinor_from_direction(r_diab), Frame::diabatic, Picture::schrodinger, 0.0};
  const EnvelopeRun run = integrate_envelope(p, noise.G > 0.0 ? &path : nullptr, s0, g.dt, g.T, g.stride);
  io::write_bloch_csv(dir / ("envelope_" + tag + ".csv"), transform(run.bloch, p, frame, picture));

  Outcome out;
  double drift = 0.0;
  for (double n : run.bloch.norm) drift = std::max(drift, std::abs(n - 1.0));
  out.report = "norm_drift=" + fmt(drift) + '\n';
  out.meta = {{"path_seed", std::to_string(path_params.seed)}, {"norm_drift", fmt(drift)}};
  return out;
}

inline Outcome run_ensemble_mode(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                                 std::uint64_t seed, std::optional<unsigned> workers) {
  EnsembleSpec spec;
  spec.tls = read_tls(c);
  spec.noise = read_noise(c, seed);
  const Grid g = read_grid(c, 0.01, 10.0);
  spec.dt = g.dt;
  spec.T = g.T;
  spec.record_stride = g.stride;
  spec.initial = read_initial(c);
  spec.frame = read_frame(c, "output.frame", Frame::diabatic);
  spec.picture = read_picture(c, "output.picture", Picture::schrodinger);
  spec.n_traj = c.get_uint("ensemble.n_traj", 1000);
  if (workers) c.set("ensemble.workers", std::to_string(*workers));  // echoed in the resolved config
  spec.workers = static_cast<unsigned>(c.get_uint("ensemble.workers", 1));
  spec.master_seed = seed;
  c.check_consumed();

  const EnsembleResult res = run_ensemble(spec);
  io::write_bloch_csv(dir / ("ensemble_" + tag + ".csv"), res.mean);
  Outcome out;
  out.report = "n_traj=" + std::to_string(res.n_traj) + " workers=" + std::to_string(res.workers) +
               " wall_seconds=" + fmt(res.wall_seconds) + '\n';
  out.meta = {{"n_traj", std::to_string(res.n_traj)},
              {"master_seed", std::to_string(res.master_seed)},
              {"workers", std::to_string(res.workers)},
              {"wall_seconds", fmt(res.wall_seconds)}};
  return out;
}

inline Outcome run_redfield_mode(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                                 std::uint64_t seed) {
  const TLSParams p = read_tls(c);
  const OUParams noise = read_noise(c, seed);
  const Grid g = read_grid(c, 0.01, 10.0);
  const BlochVector r0 = read_initial(c);
  RedfieldOptions opt;
  opt.secular = c.get_bool("redfield.secular", false);
  opt.kernel = read_kernel(c);
  opt.frame = read_frame(c, "output.frame", Frame::diabatic);
  opt.picture = read_picture(c, "output.picture", Picture::interaction);
  opt.record_stride = g.stride;
  c.check_consumed();
  const RedfieldGenerator gen = build_generator(p, noise);
  io::write_bloch_csv(dir / ("redfield_" + tag + ".csv"), integrate_redfield(gen, r0, g.dt, g.T, opt));
  Outcome out;
  out.report = "perturbative=" + std::string(gen.perturbative() ? "true" : "false") +
               " nonviscous=" + std::string(gen.nonviscous() ? "true" : "false") + '\n';
  return out;
}

inline std::string times_report(const TLSParams& p, const OUParams& noise) {
  const RedfieldGenerator g = build_generator(p, noise);
  const RelaxationTimes rt = relaxation_times(g);
  const RelaxationTimes ev = eigen_rates(g);
  std::ostringstream os;
  os << "T1_inv=" << fmt(rt.T1_inv) << " T2_inv=" << fmt(rt.T2_inv) << " Tphi_inv=" << fmt(rt.Tphi_inv)
     << " lamb_shift=" << fmt(rt.lamb_shift) << '\n';
  os << "Tphi_inv_leading=" << fmt(rt.Tphi_leading) << " eigen_T1_inv=" << fmt(ev.T1_inv)
     << " eigen_T2_inv=" << fmt(ev.T2_inv) << '\n';
  os << "Delta=" << fmt(p.Delta) << " eps0=" << fmt(p.eps0) << " D=" << fmt(p.D) << " omega=" << fmt(p.omega)
     << " G=" << fmt(noise.G) << " tau_c=" << fmt(noise.tau_c) << " Omega=" << fmt(g.Omega)
     << " perturbative=" << (g.perturbative() ? "true" : "false")
     << " nonviscous=" << (g.nonviscous() ? "true" : "false") << '\n';
  return os.str();
}

inline Outcome run_times(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                         std::uint64_t seed) {
  const TLSParams p = read_tls(c);
  const OUParams noise = read_noise(c, seed);
  c.check_consumed();
  Outcome out;
  out.report = times_report(p, noise);
  std::ofstream(dir / ("times_" + tag + ".txt")) << out.report;
  return out;
}

inline Outcome run_appendix(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                            std::uint64_t seed) {
  const TLSParams p = read_tls(c);
  const OUParams noise = read_noise(c, seed);
  const std::size_t samples = c.get_uint("appendix.samples", 10000);
  const std::size_t n_tuples = c.get_uint("appendix.tuples", 8);
  const double span = c.get_double("appendix.tuple_span", 0.5);
  ForcingSpec f;
  f.sigma1 = c.get_double("forcing.sigma1", 0.3);
  f.sigma2 = c.get_double("forcing.sigma2", 0.3);
  f.tau_f = c.get_double("forcing.tau_f", 0.5);
  f.kappa = c.get_double("forcing.kappa", 0.8);
  f.validate();
  const double tol = c.get_double("forcing.tolerance", 0.03);
  const double dt = c.get_double("grid.dt", 0.01);
  c.check_consumed();

  std::ostringstream os;
  bool ok = true;
  // (1) factorization with zero-mean forcing
  const CombinedGenerator cg = build_combined_generator(p, noise, f);
  const double leak = cross_block_leakage(cg);
  const bool leak_ok = leak < 1e-12;
  os << pass_fail(leak_ok) << " block_factorization leakage=" << fmt(leak) << '\n';
  ok &= leak_ok;
  // (2) forcing leaves the coherence rate alone (undriven copy)
  TLSParams undriven = p;
  undriven.D = 0.0;
  const double T2_inv = relaxation_times(build_generator(undriven, noise)).T2_inv;
  const ForcingRateReport fr = forcing_rate_check(undriven, noise, f, spinor_from_direction({1.0, 0.0, 0.0}),
                                                  dt, 3.5 / T2_inv, tol);
  os << pass_fail(fr.pass) << " forcing_rate rate_without=" << fmt(fr.without_forcing.rate)
     << " rate_with=" << fmt(fr.with_forcing.rate) << " rel_diff=" << fmt(fr.rel_diff)
     << " offset=" << fmt(fr.offset) << '\n';
  ok &= fr.pass;
  // (3) second-cumulant cancellation of the deterministic drive
  if (noise.tau_c > 0.0 || noise.G == 0.0) {
    const CumulantReport cr = cumulant_cancellation_check(p, noise, samples, derive_seed(seed, 1));
    os << pass_fail(cr.pass) << " cumulant_cancellation max_z=" << fmt(cr.max_abs_z)
       << " max_diff=" << fmt(cr.max_abs_diff) << " scale=" << fmt(cr.noise_scale) << '\n';
    ok &= cr.pass;
  } else {
    os << "SKIP cumulant_cancellation (needs tau_c > 0)\n";
  }
  // (4) fourth cumulant of the noise, plus the non-Gaussian control
  if (noise.tau_c > 0.0 && noise.G > 0.0) {
    const auto tuples = random_tuples(n_tuples, span, derive_seed(seed, 2));
    const FourthOrderReport g4 =
        fourth_order_check(noise, p, samples, tuples, derive_seed(seed, 3), SampleNoise::gaussian_ou);
    const FourthOrderReport ctl =
        fourth_order_check(noise, p, samples, tuples, derive_seed(seed, 3), SampleNoise::squared_control);
    os << pass_fail(g4.pass) << " fourth_cumulant chi2=" << fmt(g4.chi2) << " p=" << fmt(g4.p_value)
       << " max_z=" << fmt(g4.max_abs_z) << '\n';
    os << pass_fail(!ctl.pass) << " fourth_cumulant_control_rejected chi2=" << fmt(ctl.chi2)
       << " p=" << fmt(ctl.p_value) << '\n';
    ok &= g4.pass && !ctl.pass;
  } else {
    os << "SKIP fourth_cumulant (needs G > 0 and tau_c > 0)\n";
  }
  Outcome out;
  out.report = os.str();
  out.checks_passed = ok;
  std::ofstream(dir / ("appendix_" + tag + ".txt")) << out.report;
  return out;
}

// Fixed figure parameters; only the numerics can be tuned from the config.
inline Outcome run_fig2(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                        std::uint64_t seed, std::optional<unsigned> workers) {
  const std::size_t n_traj = c.get_uint("fig2.n_traj", 10000);
  const double dt = c.get_double("grid.dt", 0.01);
  const std::size_t stride = c.get_uint("grid.stride", 5);
  if (workers) c.set("ensemble.workers", std::to_string(*workers));
  const auto nw = static_cast<unsigned>(c.get_uint("ensemble.workers", 1));
  c.check_consumed();

  TLSParams p;
  p.eps0 = 1.5;
  const BlochVector r0 = BlochVector(1.0, 0.0, 1.0) / std::sqrt(2.0);
  std::ostringstream os;
  struct Case {
    const char* name;
    double tau_c;
  };
  for (const Case cs : {Case{"gtc0.25", 0.5}, Case{"gtc0", 0.0}}) {
    const OUParams noise{0.5, cs.tau_c, seed};
    const RedfieldGenerator g = build_generator(p, noise);
    const RelaxationTimes rt = relaxation_times(g);
    const double T = 3.0 / rt.T1_inv;
    const std::string base = "fig2_" + tag + "_" + cs.name;

    RedfieldOptions opt;
    opt.record_stride = stride;
    io::write_bloch_csv(dir / (base + "_nonsecular.csv"), integrate_redfield(g, r0, dt, T, opt));
    opt.secular = true;
    io::write_bloch_csv(dir / (base + "_secular.csv"), integrate_redfield(g, r0, dt, T, opt));
    if (cs.tau_c > 0.0) {
      opt.secular = false;
      opt.kernel = Kernel::finite_time;
      io::write_bloch_csv(dir / (base + "_nonsecular_finite.csv"), integrate_redfield(g, r0, dt, T, opt));
    }
    {
      io::CsvWriter w(dir / (base + "_analytic.csv"), {"t", "rz", "coherence"});
      const double coh0 = std::hypot(r0.x(), r0.y());
      const std::size_t n = detail::step_count(dt, T) / stride;
      for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k * stride) * dt;
        w.row({t, r0.z() * std::exp(-rt.T1_inv * t), coh0 * std::exp(-rt.T2_inv * t)});
      }
    }
    if (n_traj >= 2) {
      EnsembleSpec spec;
      spec.tls = p;
      spec.noise = noise;
      spec.initial = r0;
      spec.dt = dt;
      spec.T = T;
      spec.record_stride = stride;
      spec.n_traj = n_traj;
      spec.master_seed = seed;
      spec.workers = nw;
      spec.picture = Picture::interaction;
      io::write_bloch_csv(dir / (base + "_montecarlo.csv"), run_ensemble(spec).mean);
    }
    os << cs.name << ": " << times_report(p, noise);
  }
  Outcome out;
  out.report = os.str();
  return out;
}

inline Outcome run_fig3(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                        std::uint64_t seed, std::optional<unsigned> workers) {
  const std::size_t n_traj = c.get_uint("fig3.n_traj", 0);
  const double dt = c.get_double("grid.dt", 0.01);
  const std::size_t stride = c.get_uint("grid.stride", 10);
  if (workers) c.set("ensemble.workers", std::to_string(*workers));
  const auto nw = static_cast<unsigned>(c.get_uint("ensemble.workers", 1));
  c.check_consumed();

  struct Panel {
    const char* name;
    double G, D, tau_c;
  };
  const std::array<BlochVector, 3> starts = {BlochVector(1.0, 1.0, 1.0) / std::sqrt(3.0),
                                             BlochVector(1.0, 1.0, 0.0) / std::sqrt(2.0),
                                             BlochVector(0.0, 0.0, -1.0)};
  std::ostringstream os;
  for (const Panel pn : {Panel{"a", 0.3, 0.5, 0.5}, Panel{"b", 0.3, 1.0, 0.0}}) {
    TLSParams p;
    p.eps0 = 0.0;
    p.D = pn.D;
    p.omega = p.Delta;
    const OUParams noise{pn.G, pn.tau_c, seed};
    const RedfieldGenerator g = build_generator(p, noise);
    const RelaxationTimes rt = relaxation_times(g);
    const double T = 10.0 / std::min(rt.T1_inv, rt.T2_inv);
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const std::string base = "fig3_" + tag + "_" + pn.name + "_ic" + std::to_string(i + 1);
      RedfieldOptions opt;
      opt.frame = Frame::bare;
      opt.picture = Picture::schrodinger;
      opt.record_stride = stride;
      const BlochTrajectory rf = integrate_redfield(g, starts[i], dt, T, opt);
      io::write_bloch_csv(dir / (base + "_redfield.csv"), rf);
      os << "panel " << pn.name << " ic" << i + 1 << " |r(T)|_redfield=" << fmt(rf.r.back().norm());
      if (n_traj >= 2) {
        EnsembleSpec spec;
        spec.tls = p;
        spec.noise = noise;
        spec.initial = starts[i];
        spec.frame = Frame::bare;
        spec.dt = dt;
        spec.T = T;
        spec.record_stride = stride;
        spec.n_traj = n_traj;
        spec.master_seed = seed;
        spec.workers = nw;
        const EnsembleResult mc = run_ensemble(spec);
        io::write_bloch_csv(dir / (base + "_montecarlo.csv"), mc.mean);
        os << " |r(T)|_montecarlo=" << fmt(mc.mean.r.back().norm());
      }
      os << " T=" << fmt(T) << '\n';
    }
  }
  Outcome out;
  out.report = os.str();
  return out;
}

inline Outcome run_svea_check(io::Config& c, const std::filesystem::path& dir, const std::string& tag,
                              std::uint64_t seed) {
  SveaSpec spec;
  spec.tls = read_tls(c);
  spec.noise = read_noise(c, seed);
  spec.initial = read_initial(c);
  spec.omega0 = c.get_double("svea.omega0", 100.0);
  spec.periods = c.get_double("svea.periods", 10.0);
  spec.envelope_dt = c.get_double("svea.envelope_dt", spec.noise.tau_c > 0.0 ? spec.noise.tau_c / 10.0 : 0.05);
  spec.cutoff = c.get_double("svea.cutoff", 0.0);
  const double tol = c.get_double("svea.tolerance", 0.05);
  c.check_consumed();

  const SveaReport rep = svea_comparison(spec);
  {
    io::CsvWriter w(dir / ("svea-check_" + tag + ".csv"),
                    {"t", "rx_mech", "ry_mech", "rz_mech", "rx_env", "ry_env", "rz_env"});
    for (std::size_t k = 0; k < rep.mechanical.size(); ++k) {
      const auto& a = rep.mechanical.r[k];
      const auto& b = rep.envelope.r[k];
      w.row({rep.mechanical.times[k], a.x(), a.y(), a.z(), b.x(), b.y(), b.z()});
    }
  }
  Outcome out;
  out.checks_passed = rep.max_deviation <= tol;
  out.report = pass_fail(out.checks_passed) + " svea max_deviation=" + fmt(rep.max_deviation) +
               " tolerance=" + fmt(tol) + " omega0=" + fmt(spec.omega0) + " Q=" + fmt(rep.Q) + '\n';
  return out;
}

}  // namespace detail

/// Runs one experiment.  Messages go to `log`; artifacts go to the output
/// directory (config key `output.dir`, overridden by `ov.out`).
inline int run(io::Config config, const Overrides& ov = {}, std::ostream& log = std::cout) {
  try {
    const std::string mode = config.get_string("mode", "");
    if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end())
      throw ConfigError("mode must be one of mechanics, envelope, ensemble, redfield, times, appendix, fig2, "
                        "fig3, svea-check; got '" + mode + "'");
    const std::string tag = config.get_string("tag", "run");
    std::uint64_t seed = config.get_uint("seed", 1);
    if (ov.seed) {
      seed = *ov.seed;
      config.set("seed", std::to_string(seed));
      config.get_uint("seed", seed);
    }
    std::filesystem::path dir = config.get_string("output.dir", ".");
    if (ov.out) {
      dir = *ov.out;
      config.set("output.dir", dir.string());
      config.get_string("output.dir", dir.string());
    }
    std::filesystem::create_directories(dir);

    detail::Outcome out;
    if (mode == "mechanics") out = detail::run_mechanics(config, dir, tag, seed);
    else if (mode == "envelope") out = detail::run_envelope(config, dir, tag, seed);
    else if (mode == "ensemble") out = detail::run_ensemble_mode(config, dir, tag, seed, ov.workers);
    else if (mode == "redfield") out = detail::run_redfield_mode(config, dir, tag, seed);
    else if (mode == "times") out = detail::run_times(config, dir, tag, seed);
    else if (mode == "appendix") out = detail::run_appendix(config, dir, tag, seed);
    else if (mode == "fig2") out = detail::run_fig2(config, dir, tag, seed, ov.workers);
    else if (mode == "fig3") out = detail::run_fig3(config, dir, tag, seed, ov.workers);
    else out = detail::run_svea_check(config, dir, tag, seed);

    std::ofstream(dir / ("config_" + tag + ".resolved")) << config.resolved();
    std::vector<std::pair<std::string, std::string>> meta = {
        {"mode", mode}, {"tag", tag}, {"seed", std::to_string(seed)},
        {"checks", out.checks_passed ? "pass" : "fail"}};
    meta.insert(meta.end(), out.meta.begin(), out.meta.end());
    io::write_meta(dir / "run.meta", meta);
    log << out.report;
    return out.checks_passed ? kOk : kCheckFailed;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    log << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace oscq
