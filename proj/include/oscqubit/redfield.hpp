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

// Second-order cumulant (Redfield) description of the noise-averaged envelope.
//
// Spherical components live in the diabatic frame with the standard sign:
//   r+ = x + i y,  r- = x - i y,  r0 = Tr(rho sigma_z) = -rz.
// Interaction-picture equations:  r'_a' = -sum_b exp(i (b - a) Omega t) R_ab r'_b,
// with b - a counted in units of the index values (+1, -1, 0).

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oscqubit/core.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/ode.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {

struct RedfieldGenerator {
  TLSParams tls;
  OUParams noise;
  double Omega = 0.0;
  cplx k0, k_plus, k_minus;
  cplx R00, R0p, R0m, Rp0, Rm0, Rpp, Rmm, Rpm, Rmp;

  bool perturbative() const noexcept { return noise.perturbative(); }
  /// D tau_c < 1: the drive may be left out of the relaxation kernel.
  bool nonviscous() const noexcept { return tls.D * noise.tau_c < 1.0; }
};

/// Coefficients from given spectral values.  The finite-time kernel reuses
/// this with k_a(t).
inline RedfieldGenerator generator_from_k(const TLSParams& tls, const OUParams& noise, cplx k0,
                                          cplx kp, cplx km) {
  RedfieldGenerator g;
  g.tls = tls;
  g.noise = noise;
  g.Omega = tls.Omega();
  g.k0 = k0;
  g.k_plus = kp;
  g.k_minus = km;
  const double d = tls.Delta;
  const double e = tls.eps0;
  const double w2 = 2.0 * g.Omega * g.Omega;
  g.R00 = d * d * (kp + km) / w2;
  g.R0p = d * e * k0 / w2;
  g.R0m = g.R0p;
  g.Rp0 = 2.0 * d * e * kp / w2;
  g.Rm0 = 2.0 * d * e * km / w2;
  g.Rpp = (2.0 * e * e * k0 + d * d * km) / w2;
  g.Rmm = (2.0 * e * e * k0 + d * d * kp) / w2;
  g.Rpm = -d * d * kp / w2;
  g.Rmp = -d * d * km / w2;
  return g;
}

inline RedfieldGenerator build_generator(const TLSParams& tls, const OUParams& noise) {
  tls.validate();
  noise.validate();
  const double W = tls.Omega();
  return generator_from_k(tls, noise, spectral_k(noise, W, 0), spectral_k(noise, W, +1),
                          spectral_k(noise, W, -1));
}

/// Schrodinger-picture generator on (r+, r-, r0) without drive.
inline Eigen::Matrix3cd spherical_matrix(const RedfieldGenerator& g, bool secular = false) {
  const cplx iW{0.0, g.Omega};
  Eigen::Matrix3cd m;
  m << iW - g.Rpp, -g.Rpm, -g.Rp0,  //
      -g.Rmp, -iW - g.Rmm, -g.Rm0,  //
      -g.R0p, -g.R0m, -g.R00;
  if (secular) {
    m(0, 1) = m(0, 2) = m(1, 0) = m(1, 2) = m(2, 0) = m(2, 1) = 0.0;
  }
  return m;
}

/// The same generator acting on standard Cartesian (x, y, Tr(rho sigma_z)).
inline Eigen::Matrix3d cartesian_matrix(const RedfieldGenerator& g, bool secular = false) {
  Eigen::Matrix3cd t;
  t << 1.0, I, 0.0, 1.0, -I, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3cd a = t.inverse() * spherical_matrix(g, secular) * t;
  return a.real();
}

struct RelaxationTimes {
  double T1_inv = 0.0;
  double T2_inv = 0.0;
  double Tphi_inv = 0.0;    ///< T2_inv - T1_inv / 2
  double lamb_shift = 0.0;  ///< precession frequency is Omega + lamb_shift
  double Tphi_leading = 0.0;
};

/// Leading-order pure dephasing rate.  `conjugate_sign` flips the sign of the
/// correlated-noise correction (conjugate coefficient convention); the default sign
/// is the one that follows from the Bloch equations.
inline double tphi_leading(const TLSParams& tls, const OUParams& noise, bool conjugate_sign = false) {
  const double W2 = tls.Omega() * tls.Omega();
  const double e2 = tls.eps0 * tls.eps0;
  const double corr = noise.G * noise.G * tls.Delta * tls.Delta * e2 * noise.tau_c /
                      (W2 * W2 * (1.0 + W2 * noise.tau_c * noise.tau_c));
  return noise.G * e2 / W2 + (conjugate_sign ? corr : -corr);
}

/// Closed-form rates from the perturbative (Laplace-domain) solution of the
/// non-secular equations.
inline RelaxationTimes relaxation_times(const RedfieldGenerator& g) {
  const cplx iW{0.0, g.Omega};
  const cplx P = g.R0p * g.Rp0;
  RelaxationTimes t;
  t.T1_inv = g.R00.real() - 2.0 * (P / (g.Rpp - iW)).real();
  const cplx c = g.Rpp + P / (-iW - g.R00);
  t.T2_inv = c.real();
  t.lamb_shift = -c.imag() - std::norm(g.Rpm) / (2.0 * g.Omega);
  t.Tphi_inv = t.T2_inv - 0.5 * t.T1_inv;
  t.Tphi_leading = tphi_leading(g.tls, g.noise);
  return t;
}

/// The same closed forms written with the conjugate coefficient convention.
/// Identical to relaxation_times at tau_c = 0; kept for comparison.
inline RelaxationTimes relaxation_times_conjugate(const RedfieldGenerator& g) {
  const cplx iW{0.0, g.Omega};
  const cplx P = g.R0p * g.Rp0;
  RelaxationTimes t;
  t.T1_inv = g.R00.real() - 2.0 * (P / (iW + g.Rpp)).real();
  const cplx c = g.Rpp + P / (iW - g.R00);
  t.T2_inv = c.real();
  t.lamb_shift = c.imag() - std::norm(g.Rpm) / (2.0 * g.Omega);
  t.Tphi_inv = t.T2_inv - 0.5 * t.T1_inv;
  t.Tphi_leading = tphi_leading(g.tls, g.noise, true);
  return t;
}

/// Rates read off the eigenvalues of the (undriven, non-secular) generator:
/// the real eigenvalue gives T1, the complex pair T2 and the shifted frequency.
inline RelaxationTimes eigen_rates(const RedfieldGenerator& g) {
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(spherical_matrix(g));
  const auto& ev = es.eigenvalues();
  int real_idx = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(ev[i].imag()) < std::abs(ev[real_idx].imag())) real_idx = i;
  int cplx_idx = real_idx == 0 ? 1 : 0;
  for (int i = 0; i < 3; ++i)
    if (i != real_idx && ev[i].imag() > ev[cplx_idx].imag()) cplx_idx = i;
  RelaxationTimes t;
  t.T1_inv = -ev[real_idx].real();
  t.T2_inv = -ev[cplx_idx].real();
  t.lamb_shift = std::abs(ev[cplx_idx].imag()) - g.Omega;
  t.Tphi_inv = t.T2_inv - 0.5 * t.T1_inv;
  t.Tphi_leading = tphi_leading(g.tls, g.noise);
  return t;
}

enum class Kernel {
  markov,       ///< k_a integrated to infinity
  finite_time,  ///< k_a(t) integrated to the elapsed time (time-local second order)
};

struct RedfieldOptions {
  bool secular = false;
  Kernel kernel = Kernel::markov;
  Frame frame = Frame::diabatic;
  Picture picture = Picture::interaction;
  std::size_t record_stride = 1;
  bool include_drive = true;
};

/// Integrates the averaged Bloch equations.  r0 and the output use the
/// library Bloch convention in `opt.frame` / `opt.picture` (both pictures
/// coincide at t = 0).  Internally the Schrodinger-picture equations are
/// stepped with RK4; the drive enters only through its coherent field.
inline BlochTrajectory integrate_redfield(const RedfieldGenerator& g, const BlochVector& r0,
                                          double dt, double T, const RedfieldOptions& opt = {}) {
  detail::require(r0.allFinite() && r0.norm() <= 1.0 + 1e-12, "r0 must satisfy |r0| <= 1");
  detail::require(opt.record_stride >= 1, "record_stride must be >= 1");
  if (opt.picture == Picture::interaction && opt.frame != Frame::diabatic)
    throw FrameError("the interaction picture is only defined in the diabatic frame");
  const std::size_t n_steps = detail::step_count(dt, T);
  const TLSParams& p = g.tls;
  const Eigen::Matrix3d flip = Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal();

  const Eigen::Matrix3d a_markov = cartesian_matrix(g, opt.secular);
  const bool finite = opt.kernel == Kernel::finite_time && !g.noise.white();
  auto generator = [&](double t) -> Eigen::Matrix3d {
    if (!finite) return a_markov;
    const RedfieldGenerator gt = generator_from_k(
        p, g.noise, spectral_k_finite(g.noise, g.Omega, 0, t),
        spectral_k_finite(g.noise, g.Omega, +1, t), spectral_k_finite(g.noise, g.Omega, -1, t));
    return cartesian_matrix(gt, opt.secular);
  };
  auto rhs = [&](double t, const Eigen::Vector3d& r) -> Eigen::Vector3d {
    Eigen::Vector3d out = generator(t) * r;
    if (opt.include_drive && p.D != 0.0) {
      const double d = p.drive(t);
      const Eigen::Vector3d b(-p.Delta * d / g.Omega, 0.0, p.eps0 * d / g.Omega);
      out += b.cross(r);
    }
    return out;
  };

  BlochVector r_diab = r0;
  if (opt.frame == Frame::bare) r_diab = bloch_to_diabatic(p) * r0;
  Eigen::Vector3d r = flip * r_diab;  // standard sign

  BlochTrajectory traj;
  traj.frame = opt.frame;
  traj.picture = opt.picture;
  auto record = [&](double t) {
    BlochVector out = flip * r;
    if (opt.picture == Picture::interaction) out = bloch_to_interaction(p, t) * out;
    if (opt.frame == Frame::bare) out = bloch_to_diabatic(p).transpose() * out;
    traj.times.push_back(t);
    traj.r.push_back(out);
    traj.norm.push_back(1.0);
  };
  record(0.0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    r = ode::rk4_step(rhs, t, r, dt);
    if (!r.allFinite()) throw DivergenceError(t + dt);
    if ((n + 1) % opt.record_stride == 0) record(static_cast<double>(n + 1) * dt);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Secular Lindblad form

/// Pauli coordinates v = (Tr rho, Tr rho sx, Tr rho sy, Tr rho sz).
inline Eigen::Vector4d pauli_coordinates(const Eigen::Matrix2cd& rho) {
  return {rho.trace().real(), (rho * pauli::x()).trace().real(), (rho * pauli::y()).trace().real(),
          (rho * pauli::z()).trace().real()};
}

inline Eigen::Matrix2cd from_pauli_coordinates(const Eigen::Vector4d& v) {
  return 0.5 * (v[0] * pauli::identity() + v[1] * pauli::x() + v[2] * pauli::y() +
                v[3] * pauli::z());
}

/// Matrix of a linear map on 2x2 matrices in Pauli coordinates.
template <class Map>
Eigen::Matrix4d superoperator_matrix(Map&& L) {
  Eigen::Matrix4d m;
  for (int j = 0; j < 4; ++j) {
    Eigen::Vector4d e = Eigen::Vector4d::Zero();
    e[j] = 1.0;
    m.col(j) = pauli_coordinates(L(from_pauli_coordinates(e)));
  }
  return m;
}

/// Secular Lindblad action on rho (diabatic frame).  The interaction picture
/// omits the free precession.  Rates are first order in G through k_a.
inline Eigen::Matrix2cd lindblad_apply(const RedfieldGenerator& g, const Eigen::Matrix2cd& rho,
                                       Picture picture = Picture::interaction) {
  using namespace pauli;
  const double W2 = g.Omega * g.Omega;
  const double e2 = g.tls.eps0 * g.tls.eps0;
  const double d2 = g.tls.Delta * g.tls.Delta;
  const double re_kp = g.k_plus.real();
  const double im_kp = g.k_plus.imag();
  Eigen::Matrix2cd out =
      -(1.0 / (4.0 * W2)) *
      (2.0 * e2 * g.k0.real() * (rho - z() * rho * z()) +
       d2 * re_kp * (2.0 * rho - 2.0 * plus() * rho * minus() - 2.0 * minus() * rho * plus()) +
       I * d2 * im_kp * commutator(z(), rho));
  if (picture == Picture::schrodinger) out += -I * commutator(0.5 * g.Omega * z(), rho);
  return out;
}

/// 4x4 generator on (1, sx, sy, sz) coordinates.
inline Eigen::Matrix4d lindblad_generator(const RedfieldGenerator& g,
                                          Picture picture = Picture::interaction) {
  return superoperator_matrix([&](const Eigen::Matrix2cd& rho) { return lindblad_apply(g, rho, picture); });
}

struct JumpRates {
  double up = 0.0;    ///< |2><2| -> |1><1| population transfer rate (sigma_z: -1 -> +1)
  double down = 0.0;  ///< |1><1| -> |2><2|
};

/// Population transfer rates read off a Pauli-coordinate generator.
inline JumpRates jump_rates(const Eigen::Matrix4d& L) {
  auto pop = [&](const Eigen::Matrix2cd& rho) {
    const Eigen::Vector4d v = L * pauli_coordinates(rho);
    return from_pauli_coordinates(v);
  };
  Eigen::Matrix2cd p1 = Eigen::Matrix2cd::Zero();
  p1(0, 0) = 1.0;
  Eigen::Matrix2cd p2 = Eigen::Matrix2cd::Zero();
  p2(1, 1) = 1.0;
  return {pop(p2)(0, 0).real(), pop(p1)(1, 1).real()};
}

struct GeneratorComparison {
  double coherence_rate_lindblad = 0.0;
  double coherence_rate_redfield = 0.0;  ///< Re R++
  double population_rate_lindblad = 0.0;
  double population_rate_redfield = 0.0;  ///< R00
  double dephasing_rate_lindblad = 0.0;   ///< eps0^2 k0 / Omega^2 channel alone
  double jump_rate = 0.0;                 ///< gamma_+ = gamma_-
  double lamb_lindblad = 0.0;
  double lamb_redfield = 0.0;  ///< -Im R++
  double max_residual = 0.0;
  /// The G^2 / 4 Omega^2 prefactor form would scale every rate by this factor.
  double squared_prefactor_ratio = 0.0;
  const char* convention = "1/(4 Omega^2) with k_a proportional to G (rates first order in G)";
};

/// Maps the Lindblad generator onto spherical components and compares its
/// diagonal rates with the secular Redfield coefficients.
inline GeneratorComparison compare_generators(const RedfieldGenerator& g) {
  const Eigen::Matrix4d L = lindblad_generator(g, Picture::interaction);
  GeneratorComparison c;
  // r+ = x + i y obeys r+' = (L11 + i L21) r+ for a rotation-symmetric block.
  c.coherence_rate_lindblad = -L(1, 1);
  c.lamb_lindblad = L(2, 1);
  c.population_rate_lindblad = -L(3, 3);
  c.coherence_rate_redfield = g.Rpp.real();
  c.lamb_redfield = -g.Rpp.imag();
  c.population_rate_redfield = g.R00.real();
  c.dephasing_rate_lindblad = g.tls.eps0 * g.tls.eps0 * g.k0.real() / (g.Omega * g.Omega);
  const JumpRates j = jump_rates(L);
  c.jump_rate = j.up;
  c.max_residual = std::max({std::abs(c.coherence_rate_lindblad - c.coherence_rate_redfield),
                             std::abs(c.population_rate_lindblad - c.population_rate_redfield),
                             std::abs(c.lamb_lindblad - c.lamb_redfield), std::abs(j.up - j.down)});
  c.squared_prefactor_ratio = g.noise.G;
  return c;
}

}  // namespace oscq
