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
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oscqubit/noise.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {
namespace {

// exp(-i H t) psi for the static bare Hamiltonian, by diagonalization.
Spinor exact_bare(const TLSParams& p, const Spinor& psi, double t) {
  Eigen::Matrix2cd H;
  H << 0.5 * p.eps0, 0.5 * p.Delta, 0.5 * p.Delta, -0.5 * p.eps0;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
  Eigen::Vector2cd phases;
  for (int j = 0; j < 2; ++j) phases[j] = std::exp(cplx(0.0, -es.eigenvalues()[j] * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * psi;
}

EnvelopeState diabatic_start(const TLSParams& p, const Spinor& bare) {
  return rotate_to_diabatic({bare, Frame::bare, Picture::schrodinger, 0.0}, p);
}

Spinor random_spinor(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Spinor s(cplx(n(rng), n(rng)), cplx(n(rng), n(rng)));
  return s;
}

TEST(BlochFromSpinor, BasisStates) {
  const BlochSample a = bloch_from_spinor(Spinor(1.0, 0.0));
  EXPECT_EQ(a.r, BlochVector(0.0, 0.0, -1.0));
  EXPECT_EQ(a.norm, 1.0);
  const BlochSample b = bloch_from_spinor(Spinor(1.0, 1.0) / std::sqrt(2.0));
  EXPECT_NEAR((b.r - BlochVector(1.0, 0.0, 0.0)).norm(), 0.0, 1e-15);
}

TEST(BlochFromSpinor, PurityIdentity) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Spinor s = random_spinor(rng);
    const BlochSample b = bloch_from_spinor(s);
    EXPECT_NEAR(b.r.norm(), s.squaredNorm(), 1e-14 * s.squaredNorm());
    EXPECT_NEAR(b.norm, s.squaredNorm(), 1e-14 * s.squaredNorm());
    const BlochVector back = bloch_from_spinor(spinor_from_direction(b.r)).r;
    EXPECT_NEAR((back - b.r / b.r.norm()).norm(), 0.0, 1e-13);
  }
}

TEST(DiabaticRotation, AngleAndOrthogonality) {
  TLSParams p;
  p.eps0 = 1.5;
  EXPECT_NEAR(p.theta(), std::atan(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(p.theta(), 0.5880, 5e-5);
  const Eigen::Matrix2cd U = diabatic_rotation(p);
  EXPECT_NEAR((U * U.adjoint() - Eigen::Matrix2cd::Identity()).norm(), 0.0, 1e-14);
  EXPECT_NEAR((bloch_to_diabatic(p) * bloch_to_diabatic(p).transpose() - Eigen::Matrix3d::Identity()).norm(), 0.0,
              1e-14);
  p.eps0 = 1e9;
  EXPECT_NEAR((diabatic_rotation(p) - Eigen::Matrix2cd::Identity()).norm(), 0.0, 1e-9);
  p.eps0 = 0.0;
  const Spinor mixed = diabatic_rotation(p) * Spinor(1.0, 0.0);
  EXPECT_NEAR(std::abs(mixed[0]), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(mixed[1]), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(DiabaticRotation, DiagonalizesTheBareHamiltonian) {
  TLSParams p;
  p.eps0 = 1.5;
  Eigen::Matrix2cd H;
  H << 0.5 * p.eps0, 0.5 * p.Delta, 0.5 * p.Delta, -0.5 * p.eps0;
  const Eigen::Matrix2cd U = diabatic_rotation(p);
  const Eigen::Matrix2cd Hd = U * H * U.adjoint();
  EXPECT_NEAR(std::abs(Hd(0, 1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(Hd(1, 1).real() - Hd(0, 0).real()), p.Omega(), 1e-14);
}

TEST(Envelope, FreeEvolutionMatchesMatrixExponential) {
  TLSParams p;
  p.eps0 = 1.5;
  std::mt19937_64 rng(8);
  Spinor psi0 = random_spinor(rng);
  psi0.normalize();
  const EnvelopeRun run = integrate_envelope(p, nullptr, diabatic_start(p, psi0), 0.01, 10.0, 100);
  const BlochTrajectory bare = transform(run.bloch, p, Frame::bare, Picture::schrodinger);
  for (std::size_t k = 0; k < bare.size(); ++k) {
    const BlochVector expect = bloch_from_spinor(exact_bare(p, psi0, bare.times[k])).r;
    EXPECT_NEAR((bare.r[k] - expect).norm(), 0.0, 1e-10) << bare.times[k];
  }
}

TEST(Envelope, DiabaticPolesStayFixedAndCoherencePrecesses) {
  TLSParams p;
  p.eps0 = 1.5;
  for (double z : {-1.0, 1.0}) {
    const EnvelopeRun run =
        integrate_envelope(p, nullptr, {spinor_from_direction({0.0, 0.0, z})}, 0.01, 20.0, 50);
    for (const auto& r : run.bloch.r) EXPECT_NEAR((r - BlochVector(0.0, 0.0, z)).norm(), 0.0, 1e-12);
  }
  const EnvelopeRun run = integrate_envelope(p, nullptr, {spinor_from_direction({1.0, 0.0, 0.0})}, 0.01, 5.0, 10);
  for (std::size_t k = 0; k < run.bloch.size(); ++k) {
    const cplx rp(run.bloch.r[k].x(), run.bloch.r[k].y());
    EXPECT_NEAR(std::abs(rp - std::exp(cplx(0.0, p.Omega() * run.bloch.times[k]))), 0.0, 1e-10);
  }
  const BlochTrajectory ip = transform(run.bloch, p, Frame::diabatic, Picture::interaction);
  for (const auto& r : ip.r) EXPECT_NEAR((r - BlochVector(1.0, 0.0, 0.0)).norm(), 0.0, 1e-10);
}

TEST(Envelope, ResonantRabiOscillation) {
  TLSParams p;
  p.D = 0.05;
  p.omega = p.Delta;
  const double T = 2.0 * pi / p.D * 1.2;
  const EnvelopeRun run = integrate_envelope(p, nullptr, {spinor_from_direction({0.0, 0.0, -1.0})}, 0.02, T, 5);
  double top = -1.0, t_top = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < run.bloch.size(); ++k) {
    const double t = run.bloch.times[k], rz = run.bloch.r[k].z();
    if (rz > top) top = rz, t_top = t;
    // rotating-frame solution: rz = -cos(D t / 2)
    worst = std::max(worst, std::abs(rz + std::cos(0.5 * p.D * t)));
  }
  EXPECT_GE(top, 0.99);
  EXPECT_NEAR(t_top, 2.0 * pi / p.D, 0.02 * 2.0 * pi / p.D);
  EXPECT_LT(worst, 0.05);  // counter-rotating corrections are O(D / Delta)
}

TEST(Envelope, NoisyRealizationConservesNorm) {
  TLSParams p;
  p.eps0 = 1.5;
  p.D = 0.3;
  p.omega = 1.1;
  for (const OUParams n : {OUParams{0.5, 0.5, 4}, OUParams{0.5, 0.0, 5}}) {
    const std::size_t steps = detail::step_count(0.01, 30.0);
    const NoisePath path = sample_path(n, 0.01, n.white() ? steps : steps + 1);
    const EnvelopeRun run = integrate_envelope(p, &path, {spinor_from_direction({1.0, 0.3, 0.2})}, 0.01, 30.0);
    for (double norm : run.bloch.norm) EXPECT_NEAR(norm, 1.0, 1e-10);
  }
}

TEST(BlochEquation, FieldParallelStartIsStationary) {
  TLSParams p;
  p.eps0 = 0.7;
  const BlochVector b = BlochVector(-p.Delta, 0.0, p.eps0).normalized();
  const BlochTrajectory tr = integrate_bloch_deterministic(p, b, 0.01, 10.0, 100);
  for (const auto& r : tr.r) EXPECT_NEAR((r - b).norm(), 0.0, 1e-12);
}

TEST(BlochEquation, UniformDampingShrinksNorm) {
  TLSParams p;
  p.eps0 = 0.7;
  p.gamma = 0.2;
  const BlochVector r0(0.3, -0.5, 0.6);
  const BlochTrajectory tr = integrate_bloch_deterministic(p, r0, 0.01, 10.0, 50);
  for (std::size_t k = 0; k < tr.size(); ++k)
    EXPECT_NEAR(tr.r[k].norm(), r0.norm() * std::exp(-p.gamma * tr.times[k]), 1e-9);
}

TEST(BlochEquation, AgreesWithEnvelopeUnderDrive) {
  TLSParams p;
  p.eps0 = 1.5;
  p.D = 0.45;
  p.omega = 2.0;
  const BlochVector r0 = BlochVector(0.2, 0.6, -0.4).normalized();
  const BlochTrajectory lab = integrate_bloch_deterministic(p, r0, 0.001, 10.0, 100);
  const EnvelopeState s0 = diabatic_start(p, spinor_from_direction(r0));
  const EnvelopeRun env = integrate_envelope(p, nullptr, s0, 0.001, 10.0, 100);
  const BlochTrajectory bare = transform(env.bloch, p, Frame::bare, Picture::schrodinger);
  ASSERT_EQ(lab.size(), bare.size());
  for (std::size_t k = 0; k < lab.size(); ++k) EXPECT_NEAR((lab.r[k] - bare.r[k]).norm(), 0.0, 1e-8);
}

TEST(Transform, RoundTripAndFrameGuard) {
  TLSParams p;
  p.eps0 = 1.5;
  BlochTrajectory tr;
  tr.times = {0.0, 0.7, 2.3};
  tr.r = {BlochVector(0.1, 0.2, 0.3), BlochVector(-0.5, 0.1, 0.2), BlochVector(0.0, 0.9, -0.1)};
  const BlochTrajectory ip = transform(tr, p, Frame::diabatic, Picture::interaction);
  const BlochTrajectory bare = transform(ip, p, Frame::bare, Picture::schrodinger);
  const BlochTrajectory back = transform(bare, p, Frame::diabatic, Picture::schrodinger);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    EXPECT_NEAR((back.r[k] - tr.r[k]).norm(), 0.0, 1e-15);
    EXPECT_NEAR(bare.r[k].norm(), tr.r[k].norm(), 1e-15);
  }
  EXPECT_THROW(transform(tr, p, Frame::bare, Picture::interaction), FrameError);
  EXPECT_THROW(integrate_envelope(p, nullptr, {Spinor(1.0, 0.0), Frame::bare}, 0.01, 1.0), FrameError);
}

}  // namespace
}  // namespace oscq
