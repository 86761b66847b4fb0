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

// Combined amplitude + second-moment dynamics with an additive forcing, and
// two Monte-Carlo checks on the cumulant expansion:
//  * the deterministic drive drops out of the second cumulant;
//  * the fourth cumulant of Gaussian noise vanishes.
//
// Combined vector: Psi = (psi1, psi2, psi1* psi1, psi1* psi2, psi2* psi1, psi2* psi2).
// Since psi_i* psi_j = rho_ji the lower block is (rho11, rho21, rho12, rho22).
// Everything is in the diabatic frame, Schrodinger picture.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "oscqubit/analysis.hpp"
#include "oscqubit/core.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/ode.hpp"
#include "oscqubit/redfield.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {

/// Additive forcing f = (f1, f2) on the two envelope components.  Re and Im
/// of each f_j are independent OU processes with standard deviation sigma_j
/// and correlation time tau_f; the f1 and f2 channels are correlated with
/// coefficient kappa (same for the Re and Im channels).
struct ForcingSpec {
  cplx mean1{0.0, 0.0};
  cplx mean2{0.0, 0.0};
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double tau_f = 1.0;
  double kappa = 0.0;

  void validate() const {
    detail::require(sigma1 >= 0.0 && sigma2 >= 0.0, "forcing sigmas must be >= 0");
    detail::require(tau_f > 0.0, "tau_f must be positive");
    detail::require(std::abs(kappa) <= 1.0, "|kappa| must be <= 1 (positive semidefinite correlations)");
  }
  /// c_ij = <df_i* df_j>.
  Eigen::Matrix2d covariance() const {
    Eigen::Matrix2d c;
    c << 2.0 * sigma1 * sigma1, 2.0 * kappa * sigma1 * sigma2, 2.0 * kappa * sigma1 * sigma2,
        2.0 * sigma2 * sigma2;
    return c;
  }
  bool zero_mean() const { return mean1 == cplx{} && mean2 == cplx{}; }
};

using CombinedVector = Eigen::Matrix<cplx, 6, 1>;

struct CombinedGenerator {
  Eigen::Matrix2cd K;                    ///< mean-field block on (psi1, psi2)
  Eigen::Matrix4cd KK;                   ///< tetradic block on the second moments
  Eigen::Matrix<cplx, 4, 2> F_lin;       ///< acts on psi
  Eigen::Matrix<cplx, 4, 2> F_conj;      ///< acts on conj(psi)
  Eigen::Vector2cd inhom_upper;          ///< <f>
  Eigen::Vector4cd inhom_lower;          ///< forcing-forcing correlation pump
  double t = 0.0;

  CombinedVector apply(const CombinedVector& x, bool with_inhomogeneous = true) const {
    const Eigen::Vector2cd psi = x.head<2>();
    const Eigen::Vector4cd q = x.tail<4>();
    CombinedVector out;
    out.head<2>() = K * psi;
    out.tail<4>() = F_lin * psi + F_conj * psi.conjugate() + KK * q;
    if (with_inhomogeneous) {
      out.head<2>() += inhom_upper;
      out.tail<4>() += inhom_lower;
    }
    return out;
  }

  /// 12x12 real matrix of the homogeneous part on (Re Psi, Im Psi) pairs.
  Eigen::Matrix<double, 12, 12> real_matrix() const {
    Eigen::Matrix<double, 12, 12> m;
    for (int j = 0; j < 12; ++j) {
      CombinedVector e = CombinedVector::Zero();
      e[j / 2] = (j % 2 == 0) ? cplx{1.0, 0.0} : cplx{0.0, 1.0};
      const CombinedVector y = apply(e, false);
      for (int i = 0; i < 6; ++i) {
        m(2 * i, j) = y[i].real();
        m(2 * i + 1, j) = y[i].imag();
      }
    }
    return m;
  }
};

namespace detail {

// rho (2x2) <-> tetradic vector (rho11, rho21, rho12, rho22).
inline Eigen::Vector4cd tetradic(const Eigen::Matrix2cd& rho) {
  return {rho(0, 0), rho(1, 0), rho(0, 1), rho(1, 1)};
}
inline Eigen::Matrix2cd from_tetradic(const Eigen::Vector4cd& q) {
  Eigen::Matrix2cd rho;
  rho << q[0], q[2], q[1], q[3];
  return rho;
}

// Noise coupling V: H = H0 + (drive + noise) V in the diabatic frame.
inline Eigen::Matrix2cd coupling(const TLSParams& p) {
  return (p.eps0 * pauli::z() - p.Delta * pauli::x()) / (2.0 * p.Omega());
}

// X = int C(s) exp(-i H0 s) V exp(i H0 s) ds, with the k_a values of g.
inline Eigen::Matrix2cd kernel_operator(const RedfieldGenerator& g) {
  const double s0 = g.tls.eps0 / (2.0 * g.Omega);
  const double s1 = -g.tls.Delta / (2.0 * g.Omega);
  return s0 * g.k0 * pauli::z() + s1 * g.k_minus * pauli::plus() + s1 * g.k_plus * pauli::minus();
}

}  // namespace detail

/// Assembles the blocks at time t (the drive enters the coherent parts only).
inline CombinedGenerator build_combined_generator(const TLSParams& tls, const OUParams& noise,
                                                  const ForcingSpec& forcing, double t = 0.0) {
  forcing.validate();
  const RedfieldGenerator g = build_generator(tls, noise);
  const Eigen::Matrix2cd V = detail::coupling(tls);
  const Eigen::Matrix2cd X = detail::kernel_operator(g);
  const Eigen::Matrix2cd H = 0.5 * g.Omega * pauli::z() + tls.drive(t) * V;

  CombinedGenerator c;
  c.t = t;
  c.K = -I * H - V * X;
  for (int k = 0; k < 4; ++k) {
    Eigen::Vector4cd e = Eigen::Vector4cd::Zero();
    e[k] = 1.0;
    const Eigen::Matrix2cd rho = detail::from_tetradic(e);
    const Eigen::Matrix2cd out = -I * pauli::commutator(H, rho) -
                                 pauli::commutator(V, pauli::commutator(X, rho));
    c.KK.col(k) = detail::tetradic(out);
  }
  // d(psi_i* psi_j) gets <f_i*> psi_j + psi_i* <f_j>; row index 2 i + j.
  const cplx m[2] = {forcing.mean1, forcing.mean2};
  c.F_lin.setZero();
  c.F_conj.setZero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      c.F_lin(2 * i + j, j) += std::conj(m[i]);
      c.F_conj(2 * i + j, i) += m[j];
    }
  c.inhom_upper << m[0], m[1];
  const Eigen::Matrix2d cov = forcing.covariance();
  const double lam[2] = {0.5 * g.Omega, -0.5 * g.Omega};
  const double r = 1.0 / forcing.tau_f;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      c.inhom_lower[2 * i + j] = cov(i, j) * (1.0 / cplx(r, lam[j]) + 1.0 / cplx(r, -lam[i]));
  return c;
}

/// The 4x4 matrix in compact closed form (prefactor 1/(4 Omega^2), no coherent
/// part), kept only to report how it differs from the assembled block.
inline Eigen::Matrix4cd tetradic_compact(const RedfieldGenerator& g) {
  const double d = g.tls.Delta, e = g.tls.eps0;
  const cplx kp = g.k_plus, km = g.k_minus, k0 = g.k0;
  Eigen::Matrix4cd m;
  m << d * d * (kp + km), -2.0 * d * e * k0, -2.0 * d * e * k0, -d * d * (kp + km),  //
      -2.0 * d * e * kp, 2.0 * d * d * km + 4.0 * e * e * k0, 2.0 * d * d * kp, 2.0 * d * e * kp,  //
      -2.0 * d * e * km, -2.0 * d * e * km, 2.0 * d * d * km + 4.0 * e * e * k0, 2.0 * d * e * km,  //
      -d * d * (kp + km), 2.0 * d * e * k0, 2.0 * d * e * k0, d * d * (kp + km);
  return -m / (4.0 * g.Omega * g.Omega);
}

struct CombinedTrajectory {
  std::vector<double> times;
  std::vector<CombinedVector> states;
};

/// RK4 on the combined equations, blocks rebuilt at every stage when the
/// drive is on.
inline CombinedTrajectory integrate_combined(const TLSParams& tls, const OUParams& noise,
                                             const ForcingSpec& forcing, const CombinedVector& x0,
                                             double dt, double T, std::size_t record_stride = 1,
                                             bool with_inhomogeneous = true) {
  const std::size_t n_steps = detail::step_count(dt, T);
  detail::require(record_stride >= 1, "record_stride must be >= 1");
  const bool driven = tls.D != 0.0;
  const CombinedGenerator fixed = build_combined_generator(tls, noise, forcing, 0.0);
  auto rhs = [&](double t, const CombinedVector& x) -> CombinedVector {
    if (!driven) return fixed.apply(x, with_inhomogeneous);
    return build_combined_generator(tls, noise, forcing, t).apply(x, with_inhomogeneous);
  };
  CombinedTrajectory out;
  CombinedVector x = x0;
  out.times.push_back(0.0);
  out.states.push_back(x);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    x = ode::rk4_step(rhs, t, x, dt);
    if (!x.allFinite()) throw DivergenceError(t + dt);
    if ((n + 1) % record_stride == 0) {
      out.times.push_back(static_cast<double>(n + 1) * dt);
      out.states.push_back(x);
    }
  }
  return out;
}

inline CombinedVector combined_from_spinor(const Spinor& psi) {
  CombinedVector x;
  x.head<2>() = psi;
  x.tail<4>() = detail::tetradic(psi * psi.adjoint());
  return x;
}

/// Library-convention Bloch vector of the second-moment block.
inline BlochSample bloch_from_combined(const CombinedVector& x) {
  return bloch_from_density(detail::from_tetradic(x.tail<4>()));
}

/// Largest component that leaks between the amplitude and second-moment
/// blocks of the homogeneous generator.
inline double cross_block_leakage(const CombinedGenerator& c) {
  const auto m = c.real_matrix();
  return std::max(m.topRightCorner<4, 8>().cwiseAbs().maxCoeff(),
                  m.bottomLeftCorner<8, 4>().cwiseAbs().maxCoeff());
}

struct ForcingRateReport {
  FitResult without_forcing;
  FitResult with_forcing;
  double rel_diff = 0.0;
  double offset = 0.0;  ///< |r+ offset| of the forced steady state
  double trace_pump = 0.0;  ///< d Tr(rho) / dt from the forcing
  bool pass = false;
};

/// Stationary offset of the traceless (Bloch) part under the forcing pump,
/// in library Bloch coordinates.  Requires D = 0.
inline BlochVector forced_offset(const CombinedGenerator& c) {
  Eigen::Matrix3d M;
  Eigen::Vector3d b;
  auto bloch_of = [](const Eigen::Vector4cd& q) { return bloch_from_density(detail::from_tetradic(q)).r; };
  for (int j = 0; j < 3; ++j) {
    BlochVector e = BlochVector::Zero();
    e[j] = 1.0;
    const Eigen::Vector4cd q = detail::tetradic(density_from_bloch(e, 0.0));
    M.col(j) = bloch_of(c.KK * q);
  }
  b = bloch_of(c.inhom_lower);
  return -M.lu().solve(b);
}

/// Fits the coherence decay with and without the additive forcing pump.  The
/// forced run decays towards a stationary offset; the fit is on |r+ - r+_inf|.
inline ForcingRateReport forcing_rate_check(const TLSParams& tls, const OUParams& noise,
                                            const ForcingSpec& forcing, const Spinor& psi0,
                                            double dt, double T, double tol = 0.03) {
  detail::require(tls.D == 0.0, "forcing_rate_check needs an undriven system (D = 0)");
  detail::require(forcing.zero_mean(), "forcing_rate_check uses zero-mean forcing");
  const ForcingSpec none{};
  const RedfieldGenerator g = build_generator(tls, noise);
  const double guess = relaxation_times(g).T2_inv;
  const CombinedGenerator forced = build_combined_generator(tls, noise, forcing);
  const BlochVector offset = forced_offset(forced);

  auto fit = [&](const ForcingSpec& f, const BlochVector& r_inf) {
    const auto tr = integrate_combined(tls, noise, f, combined_from_spinor(psi0), dt, T);
    std::vector<double> y;
    for (const auto& x : tr.states) {
      const BlochVector r = bloch_from_combined(x).r - r_inf;
      y.push_back(std::hypot(r.x(), r.y()));
    }
    FitOptions opt;
    opt.rate_guess = guess;
    return fit_exponential(tr.times, y, opt);
  };
  ForcingRateReport rep;
  rep.without_forcing = fit(none, BlochVector::Zero());
  rep.with_forcing = fit(forcing, offset);
  rep.rel_diff = std::abs(rep.with_forcing.rate - rep.without_forcing.rate) / rep.without_forcing.rate;
  rep.offset = std::hypot(offset.x(), offset.y());
  rep.trace_pump = (forced.inhom_lower[0] + forced.inhom_lower[3]).real();
  rep.pass = rep.rel_diff <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Cumulant cancellation of the deterministic drive

namespace detail {

using Super = Eigen::Matrix4cd;  // column-stacked vec(rho)

inline Super kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Super k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

// rho -> -i [A, rho]
inline Super liouvillian(const Eigen::Matrix2cd& a) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return -I * (kron(id, a) - kron(a.transpose(), id));
}

// rho -> U rho U^dagger
inline Super conjugation(const Eigen::Matrix2cd& u) { return kron(u.conjugate(), u); }

// Exact stationary sample of (g(t - s), g(t)).
inline std::pair<double, double> ou_pair(const OUParams& p, double s, std::mt19937_64& rng,
                                         std::normal_distribution<double>& nd) {
  const double sd = std::sqrt(p.G / p.tau_c);
  const double a = sd * nd(rng);
  const double rho = std::exp(-s / p.tau_c);
  const double b = rho * a + sd * std::sqrt(1.0 - rho * rho) * nd(rng);
  return {a, b};
}

}  // namespace detail

struct CumulantReport {
  double max_abs_z = 0.0;
  double max_abs_diff = 0.0;  ///< largest element of the mean difference
  double noise_scale = 0.0;   ///< largest element of <Ls E Ls'>
  std::size_t n_samples = 0;
  bool pass = false;
};

/// Estimates <<L1(t) E L1(t - s)>> - <Ls(t) E Ls(t - s)> with L1 = Ld + Ls,
/// E the free propagator over s.  With the known drive mean subtracted the
/// difference is the sample mean of Ld E Ls' + Ls E Ld', zero in expectation.
inline CumulantReport cumulant_cancellation_check(const TLSParams& tls, const OUParams& noise,
                                                  std::size_t n_samples, std::uint64_t seed,
                                                  double t = 0.7, std::vector<double> lags = {}) {
  tls.validate();
  noise.validate();
  detail::require(n_samples >= 1000, "n_samples must be >= 1000");
  detail::require(noise.G == 0.0 || noise.tau_c > 0.0,
                  "point samples of the noise need tau_c > 0 (or G = 0)");
  if (lags.empty()) lags = {0.5 * std::max(noise.tau_c, 0.1), std::max(noise.tau_c, 0.1)};
  const Eigen::Matrix2cd V = detail::coupling(tls);
  const detail::Super S = detail::liouvillian(V);

  CumulantReport rep;
  rep.n_samples = n_samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double s : lags) {
    Eigen::Matrix2cd U = Eigen::Matrix2cd::Zero();  // exp(-i H0 s)
    U(0, 0) = std::polar(1.0, -0.5 * tls.Omega() * s);
    U(1, 1) = std::conj(U(0, 0));
    const detail::Super E = detail::conjugation(U);
    const double d_now = tls.drive(t);
    const double d_then = tls.drive(t - s);
    const detail::Super A = d_now * S * E * S;  // multiplies g(t - s)
    const detail::Super B = d_then * S * E * S;  // multiplies g(t)
    // X = g(t-s) A + g(t) B; accumulate its moments through the two scalars.
    double m_a = 0.0, m_b = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const auto [ga, gb] = noise.G > 0.0 ? detail::ou_pair(noise, s, rng, nd) : std::pair{0.0, 0.0};
      m_a += ga;
      m_b += gb;
      saa += ga * ga;
      sbb += gb * gb;
      sab += ga * gb;
    }
    const double n = static_cast<double>(n_samples);
    m_a /= n;
    m_b /= n;
    const double vaa = (saa - n * m_a * m_a) / (n - 1.0);
    const double vbb = (sbb - n * m_b * m_b) / (n - 1.0);
    const double vab = (sab - n * m_a * m_b) / (n - 1.0);
    const detail::Super mean = m_a * A + m_b * B;
    const double cov = noise.G > 0.0 ? noise.G / noise.tau_c * std::exp(-s / noise.tau_c) : 0.0;
    rep.noise_scale = std::max(rep.noise_scale, (cov * S * E * S).cwiseAbs().maxCoeff());
    for (int i = 0; i < 16; ++i) {
      const cplx a = A(i), b = B(i), mu = mean(i);
      for (int part = 0; part < 2; ++part) {
        const double ar = part == 0 ? a.real() : a.imag();
        const double br = part == 0 ? b.real() : b.imag();
        const double mv = part == 0 ? mu.real() : mu.imag();
        const double var = ar * ar * vaa + br * br * vbb + 2.0 * ar * br * vab;
        const double se = std::sqrt(std::max(var, 0.0) / n);
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(mv));
        if (se > 0.0) rep.max_abs_z = std::max(rep.max_abs_z, std::abs(mv) / se);
        else if (mv != 0.0) rep.max_abs_z = std::numeric_limits<double>::infinity();
      }
    }
  }
  rep.pass = rep.max_abs_z <= 3.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Fourth cumulant

enum class SampleNoise {
  gaussian_ou,      ///< the OU process itself
  squared_control,  ///< sqrt(G / tau_c) (Z^2 - 1) / sqrt(2), Z a unit OU process
};

struct TupleResult {
  std::array<double, 4> times{};
  double fourth_moment = 0.0;
  double wick_sum = 0.0;        ///< analytic pairing sum for the OU covariance
  double wick_z = 0.0;          ///< (moment - wick_sum) / stderr
  double kappa4 = 0.0;          ///< plug-in fourth cumulant
  double kappa4_stderr = 0.0;
  double z = 0.0;
};

struct FourthOrderReport {
  std::vector<TupleResult> tuples;
  double chi2 = 0.0;  ///< sum of z^2 over tuples (independent samples per tuple)
  double p_value = 1.0;
  double max_abs_z = 0.0;
  /// Largest |kappa4| times the norm of the fourth power of the noise
  /// superoperator: bounds the fourth-order kernel integrand.
  double integrand_bound = 0.0;
  bool pass = false;
};

/// Random 4-time tuples in [0, span].
inline std::vector<std::array<double, 4>> random_tuples(std::size_t n, double span, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, span);
  std::vector<std::array<double, 4>> out(n);
  for (auto& t : out)
    for (double& v : t) v = u(rng);
  return out;
}

/// Samples the noise at each tuple (n_samples independent draws per tuple)
/// and tests the fourth cumulant against zero.  The family passes when the
/// chi-square of the tuple z-scores has p >= 0.0027 (the two-sided 3 sigma level).
inline FourthOrderReport fourth_order_check(const OUParams& noise, const TLSParams& tls,
                                            std::size_t n_samples,
                                            const std::vector<std::array<double, 4>>& tuples,
                                            std::uint64_t seed,
                                            SampleNoise kind = SampleNoise::gaussian_ou) {
  noise.validate();
  detail::require(noise.tau_c > 0.0 && noise.G > 0.0, "fourth_order_check needs G > 0 and tau_c > 0");
  detail::require(n_samples >= 100, "n_samples must be >= 100");
  detail::require(!tuples.empty(), "no time tuples given");
  const double var = noise.G / noise.tau_c;
  auto C = [&](double dt) { return var * std::exp(-std::abs(dt) / noise.tau_c); };

  FourthOrderReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const double n = static_cast<double>(n_samples);
  static constexpr int pairs[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
  for (const auto& times : tuples) {
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return times[a] < times[b]; });
    std::vector<std::array<double, 4>> xs(n_samples);
    for (auto& x : xs) {
      double z = nd(rng);
      double prev_t = times[order[0]];
      for (int k = 0; k < 4; ++k) {
        const double t = times[order[k]];
        if (k > 0) {
          const double rho = std::exp(-(t - prev_t) / noise.tau_c);
          z = rho * z + std::sqrt(1.0 - rho * rho) * nd(rng);
        }
        prev_t = t;
        x[order[k]] = kind == SampleNoise::gaussian_ou ? std::sqrt(var) * z
                                                       : std::sqrt(var) * (z * z - 1.0) / std::sqrt(2.0);
      }
    }
    // second moments and the four-point moment
    Eigen::Matrix4d m2 = Eigen::Matrix4d::Zero();
    double m4 = 0.0;
    for (const auto& x : xs) {
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m2(a, b) += x[a] * x[b];
      m4 += x[0] * x[1] * x[2] * x[3];
    }
    m2 /= n;
    m4 /= n;
    double kappa = m4;
    for (const auto& p : pairs) kappa -= m2(p[0], p[1]) * m2(p[2], p[3]);
    double wick = 0.0;
    for (const auto& p : pairs) wick += C(times[p[0]] - times[p[1]]) * C(times[p[2]] - times[p[3]]);
    // influence functions
    double phi_mean = 0.0, phi_m2 = 0.0, prod_m2 = 0.0;
    std::size_t cnt = 0;
    for (const auto& x : xs) {
      const double prod = x[0] * x[1] * x[2] * x[3];
      double phi = prod;
      for (const auto& p : pairs)
        phi -= m2(p[2], p[3]) * x[p[0]] * x[p[1]] + m2(p[0], p[1]) * x[p[2]] * x[p[3]];
      ++cnt;
      const double d = phi - phi_mean;
      phi_mean += d / static_cast<double>(cnt);
      phi_m2 += d * (phi - phi_mean);
      prod_m2 += (prod - m4) * (prod - m4);
    }
    TupleResult tr;
    tr.times = times;
    tr.fourth_moment = m4;
    tr.wick_sum = wick;
    const double se4 = std::sqrt(prod_m2 / (n - 1.0) / n);
    tr.wick_z = se4 > 0.0 ? (m4 - wick) / se4 : 0.0;
    tr.kappa4 = kappa;
    tr.kappa4_stderr = std::sqrt(phi_m2 / (n - 1.0) / n);
    tr.z = tr.kappa4_stderr > 0.0 ? kappa / tr.kappa4_stderr : 0.0;
    rep.chi2 += tr.z * tr.z;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(tr.z));
    rep.integrand_bound = std::max(rep.integrand_bound, std::abs(kappa));
    rep.tuples.push_back(tr);
  }
  const detail::Super S = detail::liouvillian(detail::coupling(tls));
  const detail::Super S4 = S * S * S * S;
  rep.integrand_bound *= S4.cwiseAbs().maxCoeff();
  boost::math::chi_squared_distribution<double> chi(static_cast<double>(rep.tuples.size()));
  rep.p_value = boost::math::cdf(boost::math::complement(chi, rep.chi2));
  rep.pass = rep.p_value >= 0.0027;
  return rep;
}

}  // namespace oscq
