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


#include <cmath>

#include <gtest/gtest.h>

#include "oscqubit/mechanics.hpp"

namespace oscq {
namespace {

TEST(Mapping, ExampleFrequencies) {
  MechanicalParams a;
  a.k = 1e-300;  // k -> 0
  a.h = 1.0;
  MappedParams m = map_params(a);
  EXPECT_NEAR(m.omega0, 1.0, 1e-12);
  EXPECT_NEAR(m.Omega_c * m.Omega_c, 1.0, 1e-12);
  EXPECT_NEAR(m.tls.Delta, 1.0, 1e-12);
  MechanicalParams b;
  b.k = 3.0;
  b.h = 1.0;
  m = map_params(b);
  EXPECT_NEAR(m.omega0, 2.0, 1e-15);
  EXPECT_NEAR(m.tls.Delta, 0.5, 1e-15);
}

TEST(Mapping, RoundTrip) {
  MechanicalParams mp;
  mp.m = 2.5;
  mp.k = 7.0;
  mp.h = 0.8;
  mp.gamma = 0.01;
  mp.eps0 = 0.3;
  const MappedParams a = map_params(mp);
  const MechanicalParams back = lower(a.tls, a.omega0, mp.m);
  EXPECT_NEAR(back.k, mp.k, 1e-12);
  EXPECT_NEAR(back.h, mp.h, 1e-12);
  EXPECT_NEAR(map_params(back).tls.Delta, a.tls.Delta, 1e-12);
  EXPECT_NEAR(map_params(back).omega0, a.omega0, 1e-12);
  TLSParams too_strong;
  too_strong.Delta = 5.0;
  EXPECT_THROW(lower(too_strong, 2.0), std::invalid_argument);
}

TEST(Oscillators, UncoupledCosine) {
  MechanicalParams mp;
  mp.k = 4.0;
  const double w = 2.0;
  const double dt = 2.0 * pi / (1600.0 * w);
  const auto s = integrate_mechanics(mp, nullptr, {1.0, 0.0, 0.0, 0.0}, dt, 100 * 2.0 * pi / w, 97);
  for (const auto& x : s) {
    EXPECT_NEAR(x.x1, std::cos(w * x.t), 1e-8);
    EXPECT_EQ(x.x2, 0.0);
  }
}

TEST(Oscillators, NormalModesDoNotMix) {
  MechanicalParams mp;
  mp.k = 4.0;
  mp.h = 0.6;
  const double ws = std::sqrt(mp.k), wa = std::sqrt(mp.k + 2.0 * mp.h);
  const double dt = 2.0 * pi / (1600.0 * wa);
  const double T = 50 * 2.0 * pi / ws;
  for (const auto& x : integrate_mechanics(mp, nullptr, {1.0, 0.0, 1.0, 0.0}, dt, T, 61)) {
    EXPECT_NEAR(x.x1, std::cos(ws * x.t), 1e-8);
    EXPECT_NEAR(x.x1 - x.x2, 0.0, 1e-8);
  }
  for (const auto& x : integrate_mechanics(mp, nullptr, {1.0, 0.0, -1.0, 0.0}, dt, T, 61)) {
    EXPECT_NEAR(x.x1, std::cos(wa * x.t), 1e-8);
    EXPECT_NEAR(x.x1 + x.x2, 0.0, 1e-8);
  }
}

TEST(Oscillators, EnergyEnvelopeDecaysAtGamma) {
  // Velocity damping -gamma v: amplitude ~ exp(-gamma t / 2), energy ~ exp(-gamma t).
  MechanicalParams mp;
  mp.k = 25.0;
  mp.h = 1.0;
  mp.gamma = 0.05;
  const double dt = 2.0 * pi / (400.0 * mp.omega0());
  const MechState s0{1.0, 0.0, 0.3, 0.0};
  const double E0 = energy(mp, s0);
  const auto s = integrate_mechanics(mp, nullptr, s0, dt, 40.0, 1);
  // Average over one period to remove the kinetic/potential exchange.
  const std::size_t per = static_cast<std::size_t>(std::lround(2.0 * pi / mp.omega0() / dt));
  for (std::size_t k = per; k + per < s.size(); k += 20 * per) {
    double e = 0.0;
    for (std::size_t j = k - per / 2; j < k + per / 2; ++j) e += energy(mp, s[j]);
    e /= static_cast<double>(per / 2 * 2);
    EXPECT_NEAR(e / (E0 * std::exp(-mp.gamma * s[k].t)), 1.0, 0.02) << s[k].t;
  }
}

TEST(Oscillators, ResonantBurstGrowsLinearly) {
  MechanicalParams mp;
  mp.k = 100.0;
  const double F = 0.5, dur = 3.0;
  const MechState s = burst_initial_state(mp, F, dur, 2.0 * pi / (400.0 * mp.omega0()));
  const double amp = std::hypot(s.x1, s.v1 / mp.omega0());
  EXPECT_NEAR(amp / (F * dur / (2.0 * mp.m * mp.omega0())), 1.0, 0.01);
  EXPECT_EQ(s.t, 0.0);
}

std::vector<MechState> carrier(double w0, double dt, double T, double (*a)(double)) {
  std::vector<MechState> s;
  for (std::size_t n = 0; n * dt <= T; ++n) {
    const double t = n * dt;
    s.push_back({a(t) * std::cos(w0 * t), 0.0, 0.0, 0.0, t});
  }
  return s;
}

TEST(Demodulation, PureCarrierGivesUnitEnvelope) {
  const double w0 = 50.0, dt = 2.0 * pi / (100.0 * w0);
  const auto s = carrier(w0, dt, 20.0, [](double) { return 1.0; });
  const auto env = demodulate(s, w0);
  for (std::size_t n = 0; n < env.size(); ++n) {
    if (env[n].t < 2.0 || env[n].t > 18.0) continue;  // transient
    EXPECT_NEAR(std::abs(env[n].psi[0] - 1.0), 0.0, 1e-3) << env[n].t;
    EXPECT_NEAR(std::abs(env[n].psi[1]), 0.0, 1e-12);
  }
}

TEST(Demodulation, TracksSlowAmplitude) {
  const double w0 = 50.0, dt = 2.0 * pi / (100.0 * w0);
  auto a = [](double t) { return 1.0 + 0.3 * std::sin(0.5 * t); };
  const auto s = carrier(w0, dt, 30.0, a);
  const auto env = demodulate(s, w0);
  for (std::size_t n = 0; n < env.size(); ++n) {
    if (env[n].t < 2.0 || env[n].t > 28.0) continue;
    EXPECT_NEAR(std::abs(env[n].psi[0]) / a(env[n].t), 1.0, 0.01) << env[n].t;
  }
}

TEST(Demodulation, RecoversEnvelopeOfAnEnvelopeState) {
  TLSParams tls;
  tls.eps0 = 0.4;
  const MechanicalParams mp = lower(tls, 100.0);
  const Spinor psi = Spinor(cplx(0.6, 0.2), cplx(-0.3, 0.7)).normalized();
  const double dt = 2.0 * pi / (400.0 * 100.0);
  const auto s = integrate_mechanics(mp, nullptr, state_from_envelope(mp, psi), dt, 3.0, 1);
  const auto env = demodulate(s, 100.0);
  // Bare-frame envelope of the mechanics equals the free Schrodinger evolution.
  EnvelopeState e0 = rotate_to_diabatic({psi, Frame::bare, Picture::schrodinger, 0.0}, tls);
  const EnvelopeRun ref = integrate_envelope(tls, nullptr, e0, dt, 3.0, 1);
  for (std::size_t n = 0; n < env.size(); n += 400) {
    if (env[n].t < 0.5 || env[n].t > 2.5) continue;
    const Spinor want = rotate_to_bare(ref.states[n], tls).psi;
    EXPECT_LT((env[n].psi - want).norm(), 0.02) << env[n].t;
  }
}

TEST(Svea, NoiselessAgreementAtLargeCarrier) {
  SveaSpec s;
  s.tls.gamma = 0.01;
  s.omega0 = 100.0;
  const SveaReport r = svea_comparison(s);
  EXPECT_GE(r.Q, 1e3);
  EXPECT_LT(r.max_deviation, 0.005);
}

TEST(Svea, ErrorShrinksAsCarrierGrows) {
  double last = INFINITY;
  for (double w0 : {20.0, 50.0, 100.0}) {
    SveaSpec s;
    s.tls.gamma = 0.01;
    s.noise = {0.1, 0.5, 7};
    s.omega0 = w0;
    s.envelope_dt = 0.05;
    const double dev = svea_comparison(s).max_deviation;
    EXPECT_LT(dev, last) << w0;
    last = dev;
  }
  EXPECT_LT(last, 0.05);
}

TEST(Svea, RejectsWhiteNoisePath) {
  SveaSpec s;
  s.noise = {0.1, 0.0, 1};
  EXPECT_THROW(svea_comparison(s), std::invalid_argument);
}

}  // namespace
}  // namespace oscq
