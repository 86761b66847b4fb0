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


#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "oscqubit/analysis.hpp"
#include "oscqubit/noise.hpp"

namespace oscq {
namespace {

// Asymptotic Kolmogorov tail probability with the usual small-n correction.
double ks_p_value(double d, double n) {
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

TEST(OUPath, ZeroStrengthGivesZeroPath) {
  for (double tc : {0.0, 0.5}) {
    const NoisePath p = sample_path({0.0, tc, 3}, 0.01, 100);
    for (double v : p.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(OUPath, SameSeedSameSamples) {
  const NoisePath a = sample_path({0.5, 0.5, 42}, 0.01, 1000);
  const NoisePath b = sample_path({0.5, 0.5, 42}, 0.01, 1000);
  const NoisePath c = sample_path({0.5, 0.5, 43}, 0.01, 1000);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(OUPath, StationaryVariance) {
  // G / tau_c = 1 at every sampled time, including t = 0; sample over paths.
  const OUParams p{0.5, 0.5, 0};
  const std::size_t n_paths = 4000;
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const NoisePath path = sample_path({p.G, p.tau_c, derive_seed(7, i)}, 0.37, 10);
    s0 += path.values.front() * path.values.front();
    s1 += path.values.back() * path.values.back();
  }
  // Var of a chi^2 mean: 2 / n -> stderr ~ 0.022.
  EXPECT_NEAR(s0 / n_paths, 1.0, 3 * std::sqrt(2.0 / n_paths));
  EXPECT_NEAR(s1 / n_paths, 1.0, 3 * std::sqrt(2.0 / n_paths));
}

TEST(OUPath, TransitionResidualsAreStandardNormal) {
  // Exact-update residuals (x1 - a x0) / sqrt(v (1 - a^2)) must be N(0, 1).
  const OUParams p{0.5, 0.5, 11};
  const double dt = 0.05;
  const NoisePath path = sample_path(p, dt, 20000);
  const double a = std::exp(-dt / p.tau_c);
  const double s = std::sqrt(p.variance() * (1.0 - a * a));
  std::vector<double> z;
  for (std::size_t n = 0; n + 1 < path.values.size(); ++n) z.push_back((path.values[n + 1] - a * path.values[n]) / s);
  std::sort(z.begin(), z.end());
  double d = 0.0;
  const double n = static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double F = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
    d = std::max({d, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
  }
  EXPECT_GT(ks_p_value(d, n), 0.001) << "KS statistic " << d;
}

TEST(OUPath, WhiteIncrementsHaveVarianceTwoGdt) {
  const OUParams p{0.5, 0.0, 5};
  const double dt = 0.01;
  const NoisePath path = sample_path(p, dt, 50000);
  ASSERT_TRUE(path.white_noise);
  ASSERT_EQ(path.values.size(), 50000u);
  double m = 0.0, v = 0.0;
  for (double x : path.values) m += x;
  m /= path.values.size();
  for (double x : path.values) v += (x - m) * (x - m);
  v /= path.values.size() - 1;
  EXPECT_NEAR(v / (2 * p.G * dt), 1.0, 4 * std::sqrt(2.0 / path.values.size()));
}

TEST(Autocorrelation, ZeroPathsGiveZero) {
  std::vector<NoisePath> paths(3, sample_path({0.0, 0.5, 0}, 0.01, 200));
  for (const auto& e : autocorrelation(paths, 50, 10)) EXPECT_EQ(e.estimate, 0.0);
}

TEST(Autocorrelation, MatchesExponentialAndFitsCorrelationTime) {
  const OUParams p{0.5, 0.5, 0};  // G tau_c = 0.25
  const double dt = 0.01;
  std::vector<NoisePath> paths;
  for (std::size_t i = 0; i < 300; ++i) paths.push_back(sample_path({p.G, p.tau_c, derive_seed(99, i)}, dt, 20000));
  const auto est = autocorrelation(paths, 150, 5);
  std::vector<double> t, y, s;
  for (const auto& e : est) {
    const double expected = p.variance() * std::exp(-e.lag / p.tau_c);
    EXPECT_LT(std::abs(e.estimate - expected), 3.5 * e.std_error) << "lag " << e.lag;
    t.push_back(e.lag);
    y.push_back(e.estimate);
    s.push_back(e.std_error);
  }
  EXPECT_NEAR(est.front().estimate, p.variance(), 3 * est.front().std_error);
  FitOptions o;
  o.window = std::make_pair(0.0, 1.5);
  const FitResult f = fit_exponential(t, y, o, s);
  EXPECT_NEAR(1.0 / f.rate, p.tau_c, 0.1 * p.tau_c);
}

TEST(SpectralK, WhiteLimitAndZeroFrequency) {
  const cplx kp = spectral_k({0.5, 0.0, 0}, 1.7, +1);
  const cplx km = spectral_k({0.5, 0.0, 0}, 1.7, -1);
  EXPECT_EQ(kp, cplx(0.5, 0.0));
  EXPECT_EQ(km, cplx(0.5, 0.0));
  for (double tc : {0.1, 0.5, 3.0}) EXPECT_NEAR(std::abs(spectral_k({0.7, tc, 0}, 2.0, 0) - 0.7), 0.0, 1e-15);
}

TEST(SpectralK, AgreesWithQuadrature) {
  using boost::math::quadrature::gauss_kronrod;
  const OUParams p{0.5, 0.5, 0};
  const double W = std::sqrt(3.25);
  for (int alpha : {-1, 0, 1}) {
    auto re = [&](double s) { return p.variance() * std::exp(-s / p.tau_c) * std::cos(alpha * W * s); };
    auto im = [&](double s) { return p.variance() * std::exp(-s / p.tau_c) * std::sin(alpha * W * s); };
    const cplx q(gauss_kronrod<double, 61>::integrate(re, 0.0, 40.0, 15, 1e-14),
                 gauss_kronrod<double, 61>::integrate(im, 0.0, 40.0, 15, 1e-14));
    EXPECT_NEAR(std::abs(spectral_k(p, W, alpha) - q), 0.0, 1e-10) << alpha;
  }
  const cplx k = spectral_k(p, W, +1);
  EXPECT_NEAR(k.real(), 0.2759, 5e-5);
  EXPECT_NEAR(k.imag(), 0.2487, 5e-5);
}

TEST(SpectralK, FiniteTimeApproachesMarkov) {
  const OUParams p{0.5, 0.5, 0};
  using boost::math::quadrature::gauss_kronrod;
  for (double t : {0.1, 0.7, 3.0}) {
    auto re = [&](double s) { return p.variance() * std::exp(-s / p.tau_c) * std::cos(1.3 * s); };
    auto im = [&](double s) { return p.variance() * std::exp(-s / p.tau_c) * std::sin(1.3 * s); };
    const cplx q(gauss_kronrod<double, 31>::integrate(re, 0.0, t, 10, 1e-14),
                 gauss_kronrod<double, 31>::integrate(im, 0.0, t, 10, 1e-14));
    EXPECT_NEAR(std::abs(spectral_k_finite(p, 1.3, 1, t) - q), 0.0, 1e-12);
  }
  EXPECT_NEAR(std::abs(spectral_k_finite(p, 1.3, 1, 60.0) - spectral_k(p, 1.3, 1)), 0.0, 1e-15);
}

TEST(OUParams, RejectsNegativeValues) {
  EXPECT_THROW(OUParams({-1.0, 0.5, 0}).validate(), std::invalid_argument);
  EXPECT_THROW(OUParams({1.0, -0.5, 0}).validate(), std::invalid_argument);
  EXPECT_TRUE(OUParams({0.5, 0.5, 0}).perturbative());
  EXPECT_FALSE(OUParams({4.0, 0.5, 0}).perturbative());
}

}  // namespace
}  // namespace oscq
