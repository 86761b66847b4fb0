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

// Two coupled, damped oscillators with a parametric spring modulation
//
//   m x1'' + m gamma x1' + (k - dk(t)/2) x1 + h (x1 - x2) = f(t)
//   m x2'' + m gamma x2' + (k + dk(t)/2) x2 + h (x2 - x1) = 0
//
// with dk(t) = 2 m omega0 (eps0 + D cos(omega t) + noise(t)).  Under the slowly
// varying envelope approximation x_j = Re[psi_j exp(i omega0 t)] the pair
// (psi1, psi2) obeys the bare-frame two-level equation of tls.hpp.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "oscqubit/core.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/ode.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {

struct MechanicalParams {
  double m = 1.0;
  double gamma = 0.0;
  double k = 1.0;
  double h = 0.0;
  double eps0 = 0.0;   ///< static part of the modulation (frequency)
  double D = 0.0;      ///< drive amplitude (frequency)
  double omega = 0.0;  ///< drive frequency
  std::function<double(double)> force;  ///< optional f(t) on oscillator 1

  double omega0() const { return std::sqrt((k + h) / m); }
  /// gamma << omega0, taken as gamma < omega0 / 10.
  bool underdamped() const { return gamma < 0.1 * omega0(); }

  void validate() const {
    detail::require(std::isfinite(m) && m > 0.0, "m must be > 0");
    detail::require(std::isfinite(k) && k > 0.0, "k must be > 0");
    detail::require(std::isfinite(h) && h >= 0.0, "h must be >= 0");
    detail::require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
    detail::require(std::isfinite(eps0) && std::isfinite(D) && std::isfinite(omega),
                    "drive parameters must be finite");
  }
};

struct MechState {
  double x1 = 0.0, v1 = 0.0, x2 = 0.0, v2 = 0.0;
  double t = 0.0;
};

struct MappedParams {
  TLSParams tls;
  double omega0 = 0.0;
  double Omega_c = 0.0;  ///< sqrt(h / m)
};

inline MappedParams map_params(const MechanicalParams& mp) {
  MappedParams out;
  out.omega0 = std::sqrt((mp.k + mp.h) / mp.m);
  out.Omega_c = std::sqrt(mp.h / mp.m);
  out.tls.Delta = out.Omega_c * out.Omega_c / out.omega0;
  out.tls.eps0 = mp.eps0;
  out.tls.D = mp.D;
  out.tls.omega = mp.omega;
  out.tls.gamma = mp.gamma;
  return out;
}

/// Inverse of map_params for a chosen mass.  Requires Delta < omega0 so that k > 0.
inline MechanicalParams lower(const TLSParams& tls, double omega0, double m = 1.0) {
  detail::require(omega0 > 0.0 && m > 0.0, "omega0 and m must be positive");
  MechanicalParams mp;
  mp.m = m;
  mp.h = m * tls.Delta * omega0;
  mp.k = m * omega0 * omega0 - mp.h;
  detail::require(mp.k > 0.0, "Delta must be below omega0");
  mp.gamma = tls.gamma;
  mp.eps0 = tls.eps0;
  mp.D = tls.D;
  mp.omega = tls.omega;
  return mp;
}

/// Kinetic plus spring energy, coupling included.
inline double energy(const MechanicalParams& mp, const MechState& s) {
  const double d = s.x1 - s.x2;
  return 0.5 * mp.m * (s.v1 * s.v1 + s.v2 * s.v2) + 0.5 * mp.k * (s.x1 * s.x1 + s.x2 * s.x2) +
         0.5 * mp.h * d * d;
}

/// Fixed-step RK4.  Noise (optional) is evaluated by linear interpolation of
/// the path, so the same continuous realization can be shared with envelope runs.
inline std::vector<MechState> integrate_mechanics(const MechanicalParams& mp, const NoisePath* noise,
                                                  const MechState& initial, double dt, double T,
                                                  std::size_t record_stride = 1) {
  mp.validate();
  const double w0 = mp.omega0();
  detail::require(dt <= 2.0 * pi / (40.0 * w0) * (1.0 + 1e-12),
                  "dt must resolve the carrier: dt <= 2 pi / (40 omega0)");
  detail::require(record_stride >= 1, "record_stride must be >= 1");
  const std::size_t n_steps = detail::step_count(dt, T);
  const bool has_noise = noise != nullptr && !noise->values.empty();
  if (has_noise)
    detail::require(noise->steps() * noise->dt + 1e-12 * T >= n_steps * dt,
                    "noise path shorter than the integration window");

  using V = Eigen::Vector4d;  // x1, v1, x2, v2
  const double t0 = initial.t;
  auto rhs = [&](double t, const V& y) -> V {
    const double local = t - t0;
    const double eps = mp.eps0 + mp.D * std::cos(mp.omega * t) + (has_noise ? noise->value_at(local) : 0.0);
    const double half_dk = mp.m * w0 * eps;  // dk / 2
    const double f = mp.force ? mp.force(t) : 0.0;
    V d;
    d[0] = y[1];
    d[1] = -mp.gamma * y[1] - ((mp.k - half_dk) * y[0] + mp.h * (y[0] - y[2]) - f) / mp.m;
    d[2] = y[3];
    d[3] = -mp.gamma * y[3] - ((mp.k + half_dk) * y[2] + mp.h * (y[2] - y[0])) / mp.m;
    return d;
  };
  std::vector<MechState> out;
  out.reserve(n_steps / record_stride + 1);
  V y(initial.x1, initial.v1, initial.x2, initial.v2);
  out.push_back(initial);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    y = ode::rk4_step(rhs, t, y, dt);
    if (!y.allFinite()) throw DivergenceError(t + dt);
    if ((n + 1) % record_stride == 0)
      out.push_back({y[0], y[1], y[2], y[3], t0 + static_cast<double>(n + 1) * dt});
  }
  return out;
}

/// Mechanical state whose slowly varying envelope is psi (bare frame) at t,
/// including the envelope's own derivative so no fast transient is excited.
inline MechState state_from_envelope(const MechanicalParams& mp, const Spinor& psi, double t = 0.0,
                                     double noise_value = 0.0) {
  const MappedParams mapped = map_params(mp);
  const double w0 = mapped.omega0;
  const double eps = mp.eps0 + mp.D * std::cos(mp.omega * t) + noise_value;
  Eigen::Matrix2cd H;
  H << 0.5 * eps, 0.5 * mapped.tls.Delta, 0.5 * mapped.tls.Delta, -0.5 * eps;
  const Spinor dpsi = -I * (H * psi) - 0.5 * mp.gamma * psi;
  const cplx phase = std::polar(1.0, w0 * t);
  const cplx z1 = psi[0] * phase;
  const cplx z2 = psi[1] * phase;
  const cplx dz1 = (dpsi[0] + I * w0 * psi[0]) * phase;
  const cplx dz2 = (dpsi[1] + I * w0 * psi[1]) * phase;
  return {z1.real(), dz1.real(), z2.real(), dz2.real(), t};
}

/// The resonant-burst protocol: start at rest, drive oscillator 1 with
/// F cos(omega0 t) for `duration`, then switch the force off.  Returns the
/// state at the end of the burst, re-timed to t = 0.
inline MechState burst_initial_state(MechanicalParams mp, double F, double duration, double dt) {
  const double w0 = mp.omega0();
  mp.force = [F, w0, duration](double t) { return t < duration ? F * std::cos(w0 * t) : 0.0; };
  const auto run = integrate_mechanics(mp, nullptr, MechState{}, dt, duration, detail::step_count(dt, duration));
  MechState s = run.back();
  s.t = 0.0;
  return s;
}

namespace detail {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

// RBJ low-pass at cutoff `wc` (rad per unit time), sample step dt, Q = 1/sqrt(2).
inline Biquad butterworth_lowpass(double wc, double dt) {
  const double w = wc * dt;
  const double alpha = std::sin(w) / (2.0 * (1.0 / std::sqrt(2.0)));
  const double cw = std::cos(w);
  const double a0 = 1.0 + alpha;
  return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
          (1.0 - alpha) / a0};
}

template <class T>
std::vector<T> biquad_pass(const Biquad& f, const std::vector<T>& x) {
  std::vector<T> y(x.size());
  // start from the steady state for a constant input equal to x[0]
  T s1 = x.empty() ? T{} : x[0] * (1.0 - f.b0);
  T s2 = x.empty() ? T{} : x[0] * (f.b2 - f.a2);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const T out = f.b0 * x[n] + s1;
    s1 = f.b1 * x[n] - f.a1 * out + s2;
    s2 = f.b2 * x[n] - f.a2 * out;
    y[n] = out;
  }
  return y;
}

// Forward-backward filtering with odd reflection padding about the given
// anchors (the local signal level at each end).
template <class T>
std::vector<T> filtfilt(const Biquad& f, const std::vector<T>& x, std::size_t pad, T front, T back) {
  const std::size_t n = x.size();
  pad = std::min(pad, n - 1);
  std::vector<T> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * front - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * back - x[n - 1 - k]);
  std::vector<T> y = biquad_pass(f, ext);
  std::reverse(y.begin(), y.end());
  y = biquad_pass(f, y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

template <class T>
std::vector<T> filtfilt(const Biquad& f, const std::vector<T>& x, std::size_t pad) {
  return filtfilt(f, x, pad, x.front(), x.back());
}

}  // namespace detail

/// I/Q demodulation at omega0 followed by a zero-phase low-pass at `cutoff`
/// (rad per unit time, 0 < cutoff < omega0; default omega0 / 10).
/// Returns bare-frame Schrodinger-picture envelopes on the input samples.
inline std::vector<EnvelopeState> demodulate(std::span<const MechState> series, double omega0,
                                             double cutoff = 0.0) {
  detail::require(series.size() >= 4, "series too short to demodulate");
  detail::require(omega0 > 0.0, "omega0 must be positive");
  if (cutoff == 0.0) cutoff = omega0 / 10.0;
  if (!(cutoff > 0.0 && cutoff < omega0)) throw std::invalid_argument("cutoff must lie in (0, omega0)");
  const double dt = series[1].t - series[0].t;
  detail::require(dt > 0.0, "series must be sampled on increasing times");
  detail::require(cutoff * dt < pi, "cutoff above the Nyquist frequency");

  std::vector<cplx> z1(series.size()), z2(series.size());
  for (std::size_t n = 0; n < series.size(); ++n) {
    const cplx c = 2.0 * std::polar(1.0, -omega0 * series[n].t);
    z1[n] = series[n].x1 * c;
    z2[n] = series[n].x2 * c;
  }
  const auto filt = detail::butterworth_lowpass(cutoff, dt);
  const auto pad = static_cast<std::size_t>(std::ceil(6.0 * 2.0 * pi / (cutoff * dt)));
  // Anchor the padding on the mean over one carrier period at each end: the
  // raw product carries a 2 omega0 image that a plain endpoint reflection
  // would turn into a step.
  const auto span = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(2.0 * pi / (omega0 * dt))), 1, series.size());
  auto mean = [span](const std::vector<cplx>& z, bool front) {
    cplx m{};
    for (std::size_t k = 0; k < span; ++k) m += front ? z[k] : z[z.size() - 1 - k];
    return m / static_cast<double>(span);
  };
  z1 = detail::filtfilt(filt, z1, pad, mean(z1, true), mean(z1, false));
  z2 = detail::filtfilt(filt, z2, pad, mean(z2, true), mean(z2, false));
  std::vector<EnvelopeState> out(series.size());
  for (std::size_t n = 0; n < series.size(); ++n)
    out[n] = {Spinor(z1[n], z2[n]), Frame::bare, Picture::schrodinger, series[n].t};
  return out;
}


struct SveaSpec {
  TLSParams tls;           ///< gamma is the mechanical damping rate
  OUParams noise;          ///< noise.seed selects the shared path
  double omega0 = 100.0;   ///< carrier, in units of Delta
  double m = 1.0;
  BlochVector initial = BlochVector(0.0, 0.0, -1.0);  ///< bare frame, pure
  double periods = 10.0;   ///< horizon in precession periods 2 pi / Omega
  double envelope_dt = 0.01;
  double carriers_per_step = 1.0 / 400.0;  ///< mechanics dt = carriers_per_step * 2 pi / omega0
  double cutoff = 0.0;     ///< demodulation cutoff; 0 -> omega0 / 10
  double edge = 0.0;       ///< time excluded at both ends; 0 -> 5 / cutoff
};

struct SveaReport {
  BlochTrajectory mechanical;  ///< demodulated, gamma decay removed, bare frame
  BlochTrajectory envelope;    ///< same times, bare frame
  double max_deviation = 0.0;  ///< max over time of |r_mech - r_env|_inf inside the edges
  double T = 0.0;
  double Q = 0.0;
};

/// Runs the oscillators and the envelope equation on one noise path and
/// compares their Bloch vectors.  The uniform gamma decay is divided out of
/// the mechanical envelope (the envelope equation has it factored out).
inline SveaReport svea_comparison(const SveaSpec& spec) {
  spec.tls.validate();
  spec.noise.validate();
  detail::require(!spec.noise.white() || spec.noise.G == 0.0,
                  "the shared path needs tau_c > 0 (a continuous realization)");
  const double Omega = spec.tls.Omega();
  const double T = spec.periods * 2.0 * pi / Omega;
  const std::size_t env_steps = detail::step_count(spec.envelope_dt, T);
  const NoisePath path = spec.noise.G > 0.0 ? sample_path(spec.noise, spec.envelope_dt, env_steps + 1)
                                            : NoisePath{};
  const NoisePath* shared = spec.noise.G > 0.0 ? &path : nullptr;

  // envelope reference, diabatic frame internally
  const Spinor psi0 = spinor_from_direction(spec.initial.normalized());
  const EnvelopeState bare0{psi0, Frame::bare, Picture::schrodinger, 0.0};
  const EnvelopeRun env = integrate_envelope(spec.tls, shared, rotate_to_diabatic(bare0, spec.tls),
                                             spec.envelope_dt, T);
  const BlochTrajectory env_bare = transform(env.bloch, spec.tls, Frame::bare, Picture::schrodinger);

  // mechanics on the same path
  const MechanicalParams mp = lower(spec.tls, spec.omega0, spec.m);
  const double dt = spec.carriers_per_step * 2.0 * pi / spec.omega0;
  const MechState init = state_from_envelope(mp, psi0, 0.0, shared ? path.value_at(0.0) : 0.0);
  const auto series = integrate_mechanics(mp, shared, init, dt, T);
  const double cutoff = spec.cutoff > 0.0 ? spec.cutoff : spec.omega0 / 10.0;
  const auto demod = demodulate(series, spec.omega0, cutoff);
  const double edge = spec.edge > 0.0 ? spec.edge : 5.0 / cutoff;

  SveaReport rep;
  rep.T = T;
  rep.Q = spec.tls.gamma > 0.0 ? spec.omega0 / spec.tls.gamma : std::numeric_limits<double>::infinity();
  rep.mechanical.frame = rep.envelope.frame = Frame::bare;
  rep.mechanical.picture = rep.envelope.picture = Picture::schrodinger;
  // sample the mechanical run on the envelope grid
  const double ratio = spec.envelope_dt / dt;
  for (std::size_t k = 0; k < env_bare.size(); ++k) {
    const double t = env_bare.times[k];
    const auto idx = static_cast<std::size_t>(std::lround(static_cast<double>(k) * ratio));
    if (idx >= demod.size()) break;
    BlochSample b = bloch_from_state(demod[idx]);
    const double undo = std::exp(spec.tls.gamma * demod[idx].t);
    b.r *= undo;
    b.norm *= undo;
    rep.mechanical.times.push_back(t);
    rep.mechanical.r.push_back(b.r);
    rep.mechanical.norm.push_back(b.norm);
    rep.envelope.times.push_back(t);
    rep.envelope.r.push_back(env_bare.r[k]);
    rep.envelope.norm.push_back(env_bare.norm[k]);
    if (t >= edge && t <= T - edge)
      rep.max_deviation = std::max(rep.max_deviation, (b.r - env_bare.r[k]).cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace oscq
