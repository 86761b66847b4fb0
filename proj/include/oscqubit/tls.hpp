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

// Envelope (two-level) dynamics of the coupled oscillators.
//
// Conventions used throughout the library:
//  * psi = (psi1, psi2) and rho = psi psi^dagger.
//  * The Bloch vector is rx = 2 Re(psi1* psi2), ry = 2 Im(psi1* psi2),
//    rz = |psi2|^2 - |psi1|^2.  Its z component is -Tr(rho sigma_z).
//  * The bare-frame Hamiltonian is H = (Delta sigma_x + eps(t) sigma_z) / 2.
//    The diabatic frame psi' = exp(i theta sigma_y / 2) psi, theta = atan2(Delta, eps0),
//    diagonalizes the static part into Omega sigma_z / 2.
//  * The interaction picture is taken with respect to H0 = Omega sigma_z / 2
//    in the diabatic frame.

#include <algorithm>
#include <cmath>
#include <vector>

#include "oscqubit/core.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/ode.hpp"

namespace oscq {

struct TLSParams {
  double Delta = 1.0;  ///< tunnel splitting
  double eps0 = 0.0;   ///< static detuning
  double D = 0.0;      ///< drive amplitude
  double omega = 0.0;  ///< drive frequency
  double gamma = 0.0;  ///< friction rate (factored out of envelope runs)

  double Omega() const noexcept { return std::hypot(eps0, Delta); }
  /// Rotation angle into the diabatic frame; pi/2 at eps0 = 0.
  double theta() const noexcept { return std::atan2(Delta, eps0); }
  double drive(double t) const noexcept { return D * std::cos(omega * t); }

  void validate() const {
    detail::require(std::isfinite(Delta) && std::isfinite(eps0) && std::isfinite(D) &&
                        std::isfinite(omega) && std::isfinite(gamma),
                    "TLS parameters must be finite");
    detail::require(gamma >= 0.0, "gamma must be >= 0");
    detail::require(Omega() > 0.0, "Omega = sqrt(eps0^2 + Delta^2) must be positive");
  }
};

enum class Frame { bare, diabatic };
enum class Picture { schrodinger, interaction };

struct EnvelopeState {
  Spinor psi = Spinor(1.0, 0.0);
  Frame frame = Frame::diabatic;
  Picture picture = Picture::schrodinger;
  double t = 0.0;
};

struct BlochSample {
  BlochVector r = BlochVector::Zero();
  double norm = 0.0;
};

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<BlochVector> r;
  std::vector<double> norm;          ///< optional |psi|^2 or Tr(rho)
  std::vector<BlochVector> std_error;  ///< optional, ensemble runs only
  Frame frame = Frame::diabatic;
  Picture picture = Picture::schrodinger;

  std::size_t size() const noexcept { return times.size(); }
};

inline BlochSample bloch_from_spinor(const Spinor& psi) {
  const cplx c = std::conj(psi[0]) * psi[1];
  const double p1 = std::norm(psi[0]);
  const double p2 = std::norm(psi[1]);
  return {BlochVector(2.0 * c.real(), 2.0 * c.imag(), p2 - p1), p1 + p2};
}

inline BlochSample bloch_from_state(const EnvelopeState& s) { return bloch_from_spinor(s.psi); }

/// Bloch vector of a (possibly mixed, unnormalized) rho with rho_ij = <psi_i psi_j*>.
inline BlochSample bloch_from_density(const Eigen::Matrix2cd& rho) {
  const cplx c = rho(1, 0);  // psi2 psi1*
  return {BlochVector(2.0 * c.real(), 2.0 * c.imag(), rho(1, 1).real() - rho(0, 0).real()),
          rho(0, 0).real() + rho(1, 1).real()};
}

inline Eigen::Matrix2cd density_from_bloch(const BlochVector& r, double norm = 1.0) {
  // rho = (norm I + x sx + y sy - z sz) / 2 in the library's z convention.
  Eigen::Matrix2cd rho;
  rho(0, 0) = 0.5 * (norm - r.z());
  rho(1, 1) = 0.5 * (norm + r.z());
  rho(1, 0) = 0.5 * cplx(r.x(), r.y());
  rho(0, 1) = std::conj(rho(1, 0));
  return rho;
}

/// Pure spinor whose Bloch vector is the unit vector along r.
inline Spinor spinor_from_direction(const BlochVector& r) {
  const double len = r.norm();
  if (len == 0.0) return Spinor(1.0, 0.0);
  const BlochVector n = r / len;
  // cos(beta) = Tr(rho sigma_z) = -n_z
  const double beta = std::acos(std::clamp(-n.z(), -1.0, 1.0));
  const double phi = std::atan2(n.y(), n.x());
  return Spinor(std::cos(0.5 * beta), std::polar(std::sin(0.5 * beta), phi));
}

// ---------------------------------------------------------------------------
// Frame and picture changes

/// exp(i theta sigma_y / 2).
inline Eigen::Matrix2cd diabatic_rotation(const TLSParams& p) {
  const double c = std::cos(0.5 * p.theta());
  const double s = std::sin(0.5 * p.theta());
  Eigen::Matrix2cd m;
  m << c, s, -s, c;
  return m;
}

inline EnvelopeState rotate_to_diabatic(const EnvelopeState& s, const TLSParams& p) {
  if (s.frame != Frame::bare) throw FrameError("rotate_to_diabatic: state is not in the bare frame");
  if (s.picture != Picture::schrodinger)
    throw FrameError("rotate_to_diabatic: frame changes require the Schrodinger picture");
  EnvelopeState out = s;
  out.psi = diabatic_rotation(p) * s.psi;
  out.frame = Frame::diabatic;
  return out;
}

inline EnvelopeState rotate_to_bare(const EnvelopeState& s, const TLSParams& p) {
  if (s.frame != Frame::diabatic) throw FrameError("rotate_to_bare: state is not in the diabatic frame");
  if (s.picture != Picture::schrodinger)
    throw FrameError("rotate_to_bare: frame changes require the Schrodinger picture");
  EnvelopeState out = s;
  out.psi = diabatic_rotation(p).adjoint() * s.psi;
  out.frame = Frame::bare;
  return out;
}

/// psi_I = exp(i H0 t) psi_S.
inline EnvelopeState to_interaction(const EnvelopeState& s, const TLSParams& p) {
  if (s.frame != Frame::diabatic || s.picture != Picture::schrodinger)
    throw FrameError("to_interaction: expects a diabatic Schrodinger-picture state");
  const double a = 0.5 * p.Omega() * s.t;
  EnvelopeState out = s;
  out.psi = Spinor(std::polar(1.0, a) * s.psi[0], std::polar(1.0, -a) * s.psi[1]);
  out.picture = Picture::interaction;
  return out;
}

inline EnvelopeState to_schrodinger(const EnvelopeState& s, const TLSParams& p) {
  if (s.frame != Frame::diabatic || s.picture != Picture::interaction)
    throw FrameError("to_schrodinger: expects a diabatic interaction-picture state");
  const double a = 0.5 * p.Omega() * s.t;
  EnvelopeState out = s;
  out.psi = Spinor(std::polar(1.0, -a) * s.psi[0], std::polar(1.0, a) * s.psi[1]);
  out.picture = Picture::schrodinger;
  return out;
}

/// Bloch-vector image of rotate_to_diabatic: a rotation by theta about y.
inline Eigen::Matrix3d bloch_to_diabatic(const TLSParams& p) {
  const double c = std::cos(p.theta());
  const double s = std::sin(p.theta());
  Eigen::Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

/// Bloch-vector image of to_interaction at time t: r+ = rx + i ry picks up exp(-i Omega t).
inline Eigen::Matrix3d bloch_to_interaction(const TLSParams& p, double t) {
  const double c = std::cos(p.Omega() * t);
  const double s = std::sin(p.Omega() * t);
  Eigen::Matrix3d m;
  m << c, s, 0, -s, c, 0, 0, 0, 1;
  return m;
}

/// Re-express a trajectory in another frame and picture.
inline BlochTrajectory transform(const BlochTrajectory& in, const TLSParams& p, Frame frame,
                                 Picture picture) {
  if (picture == Picture::interaction && frame != Frame::diabatic)
    throw FrameError("the interaction picture is only defined in the diabatic frame");
  BlochTrajectory out = in;
  out.frame = frame;
  out.picture = picture;
  const Eigen::Matrix3d to_diab = bloch_to_diabatic(p);
  for (std::size_t n = 0; n < in.size(); ++n) {
    const double t = in.times[n];
    // bring to diabatic Schrodinger
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    if (in.picture == Picture::interaction) m = bloch_to_interaction(p, t).transpose();
    if (in.frame == Frame::bare) m = m * to_diab;
    if (picture == Picture::interaction) m = bloch_to_interaction(p, t) * m;
    if (frame == Frame::bare) m = to_diab.transpose() * m;
    out.r[n] = m * in.r[n];
    if (!in.std_error.empty()) {
      // per-component errors of a rotated vector: propagate as independent
      const Eigen::Matrix3d m2 = m.cwiseAbs2();
      out.std_error[n] = (m2 * in.std_error[n].cwiseAbs2()).cwiseSqrt();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unitary stepping

/// Field b of H = b . sigma / 2 (standard Pauli coordinates) for the diabatic
/// frame with total fluctuating detuning eps'(t) = drive + noise.
inline Eigen::Vector3d diabatic_field(const TLSParams& p, double eps_prime) {
  const double W = p.Omega();
  return {-p.Delta * eps_prime / W, 0.0, W + p.eps0 * eps_prime / W};
}

/// Interaction-picture field: the perturbation part rotated by -Omega t about z.
inline Eigen::Vector3d interaction_field(const TLSParams& p, double eps_prime, double t) {
  const double W = p.Omega();
  const double bx = -p.Delta * eps_prime / W;
  const double bz = p.eps0 * eps_prime / W;
  const double c = std::cos(W * t);
  const double s = std::sin(W * t);
  return {c * bx, -s * bx, bz};
}

/// exp(-i c . sigma) applied to psi.
inline Spinor apply_su2(const Eigen::Vector3d& c, const Spinor& psi) {
  const double angle = c.norm();
  if (angle == 0.0) return psi;
  const Eigen::Vector3d n = c / angle;
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  const cplx u00{ca, -sa * n.z()};
  const cplx u11{ca, sa * n.z()};
  const cplx u01 = -I * sa * cplx(n.x(), -n.y());
  const cplx u10 = -I * sa * cplx(n.x(), n.y());
  return Spinor(u00 * psi[0] + u01 * psi[1], u10 * psi[0] + u11 * psi[1]);
}

/// Fourth-order Magnus step for i psi' = (b(t) . sigma / 2) psi.
/// Exactly unitary for any step size.
struct MagnusStep {
  static constexpr double node_lo = 0.5 - 0.28867513459481288225;  // 1/2 - sqrt(3)/6
  static constexpr double node_hi = 0.5 + 0.28867513459481288225;
  static constexpr double comm = 0.07216878364870322056;  // sqrt(3)/24

  static Spinor apply(const Eigen::Vector3d& b1, const Eigen::Vector3d& b2, double h,
                      const Spinor& psi) {
    const Eigen::Vector3d c = 0.25 * h * (b1 + b2) - comm * h * h * b1.cross(b2);
    return apply_su2(c, psi);
  }
};

/// Steps the diabatic-frame envelope equation with a given noise value at the
/// two Gauss nodes of each step.  Shared by single runs and the ensemble
/// engine so both produce identical arithmetic.
class EnvelopeStepper {
 public:
  EnvelopeStepper(const TLSParams& p, Picture picture) : p_(p), picture_(picture) {}

  /// One step from t to t + h.  `g_lo` and `g_hi` are noise values at the nodes.
  Spinor step(const Spinor& psi, double t, double h, double g_lo, double g_hi) const {
    const double t1 = t + MagnusStep::node_lo * h;
    const double t2 = t + MagnusStep::node_hi * h;
    const double e1 = p_.drive(t1) + g_lo;
    const double e2 = p_.drive(t2) + g_hi;
    if (picture_ == Picture::schrodinger)
      return MagnusStep::apply(diabatic_field(p_, e1), diabatic_field(p_, e2), h, psi);
    return MagnusStep::apply(interaction_field(p_, e1, t1), interaction_field(p_, e2, t2), h, psi);
  }

  /// Colored noise known at the step end points; linear in between.
  Spinor step_colored(const Spinor& psi, double t, double h, double g0, double g1) const {
    return step(psi, t, h, g0 + MagnusStep::node_lo * (g1 - g0), g0 + MagnusStep::node_hi * (g1 - g0));
  }

  /// White noise given as the increment over the step.
  Spinor step_white(const Spinor& psi, double t, double h, double increment) const {
    const double g = increment / h;
    return step(psi, t, h, g, g);
  }

 private:
  TLSParams p_;
  Picture picture_;
};

struct EnvelopeRun {
  std::vector<EnvelopeState> states;
  BlochTrajectory bloch;
};

/// Integrates the diabatic-frame envelope equation for one noise realization
/// (or none).  The uniform gamma decay is factored out, so the evolution is
/// unitary.
inline EnvelopeRun integrate_envelope(const TLSParams& p, const NoisePath* noise,
                                      const EnvelopeState& s0, double dt, double T,
                                      std::size_t record_stride = 1) {
  p.validate();
  if (s0.frame != Frame::diabatic) throw FrameError("integrate_envelope: initial state must be diabatic");
  detail::require(record_stride >= 1, "record_stride must be >= 1");
  const std::size_t n_steps = detail::step_count(dt, T);
  if (noise != nullptr && !noise->values.empty()) {
    detail::require(noise->steps() * noise->dt + 1e-12 * T >= n_steps * dt,
                    "noise path shorter than the integration window");
    if (noise->white_noise)
      detail::require(std::abs(noise->dt - dt) <= 1e-12 * dt,
                      "white-noise increments must be sampled on the integrator step");
  }

  EnvelopeStepper stepper(p, s0.picture);
  EnvelopeRun run;
  run.bloch.frame = Frame::diabatic;
  run.bloch.picture = s0.picture;
  auto record = [&](const Spinor& psi, double t) {
    EnvelopeState s{psi, Frame::diabatic, s0.picture, t};
    const auto b = bloch_from_spinor(psi);
    run.states.push_back(s);
    run.bloch.times.push_back(t);
    run.bloch.r.push_back(b.r);
    run.bloch.norm.push_back(b.norm);
  };

  Spinor psi = s0.psi;
  const double t0 = s0.t;
  record(psi, t0);
  const bool has_noise = noise != nullptr && !noise->values.empty();
  const bool same_grid = has_noise && std::abs(noise->dt - dt) <= 1e-12 * dt;
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    const double local = static_cast<double>(n) * dt;
    if (!has_noise) {
      psi = stepper.step(psi, t, dt, 0.0, 0.0);
    } else if (noise->white_noise) {
      psi = stepper.step_white(psi, t, dt, noise->values[n]);
    } else if (same_grid) {
      psi = stepper.step_colored(psi, t, dt, noise->values[n], noise->values[n + 1]);
    } else {
      psi = stepper.step(psi, t, dt, noise->value_at(local + MagnusStep::node_lo * dt),
                         noise->value_at(local + MagnusStep::node_hi * dt));
    }
    if (!detail::finite(psi)) throw DivergenceError(t + dt);
    if ((n + 1) % record_stride == 0) record(psi, t0 + static_cast<double>(n + 1) * dt);
  }
  return run;
}

/// Lab-frame Bloch equation r' = b(t) x r - gamma r, with b = (-Delta, 0, eps(t))
/// the field that generates H = (Delta sigma_x + eps sigma_z) / 2 in the
/// library's Bloch convention.  Classical RK4.
inline BlochTrajectory integrate_bloch_deterministic(const TLSParams& p, const BlochVector& r0,
                                                     double dt, double T,
                                                     std::size_t record_stride = 1) {
  detail::require(std::isfinite(p.Delta) && std::isfinite(p.eps0), "TLS parameters must be finite");
  detail::require(record_stride >= 1, "record_stride must be >= 1");
  const std::size_t n_steps = detail::step_count(dt, T);
  auto rhs = [&](double t, const BlochVector& r) -> BlochVector {
    const Eigen::Vector3d b(-p.Delta, 0.0, p.eps0 + p.drive(t));
    return b.cross(r) - p.gamma * r;
  };
  BlochTrajectory traj;
  traj.frame = Frame::bare;
  traj.picture = Picture::schrodinger;
  BlochVector r = r0;
  traj.times.push_back(0.0);
  traj.r.push_back(r);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    r = ode::rk4_step(rhs, t, r, dt);
    if (!detail::finite(r)) throw DivergenceError(t + dt);
    if ((n + 1) % record_stride == 0) {
      traj.times.push_back(static_cast<double>(n + 1) * dt);
      traj.r.push_back(r);
    }
  }
  return traj;
}

}  // namespace oscq
