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

// Stationary Gaussian Ornstein-Uhlenbeck noise for the parametric drive.
//
// The process has <g(0) g(t)> = (G / tau_c) exp(-|t| / tau_c).  Its integral
// over the whole line is 2G, which fixes the white-noise limit tau_c -> 0:
// increments over a step dt have variance 2 G dt.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscqubit/core.hpp"

namespace oscq {

struct OUParams {
  double G = 0.0;      ///< noise strength (frequency)
  double tau_c = 0.0;  ///< correlation time; 0 selects the white-noise limit
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(std::isfinite(G) && G >= 0.0, "noise strength G must be >= 0");
    detail::require(std::isfinite(tau_c) && tau_c >= 0.0, "tau_c must be >= 0");
  }
  bool white() const noexcept { return tau_c == 0.0; }
  /// G * tau_c < 1, the validity condition of the second-order cumulant expansion.
  bool perturbative() const noexcept { return G * tau_c < 1.0; }
  /// Stationary variance G / tau_c (infinite for white noise).
  double variance() const noexcept {
    return white() ? std::numeric_limits<double>::infinity() : G / tau_c;
  }
};

/// A sampled realization of the drive noise on a uniform grid.
///
/// Colored paths hold n_steps + 1 point values at t = n dt.  White paths hold
/// n_steps increments, values[n] being the integral of the noise over step n.
struct NoisePath {
  double dt = 0.0;
  std::vector<double> values;
  bool white_noise = false;

  std::size_t steps() const noexcept {
    if (values.empty()) return 0;
    return white_noise ? values.size() : values.size() - 1;
  }

  /// Piecewise-linear value at time t (colored paths) or the step-averaged
  /// rate increment / dt (white paths).
  double value_at(double t) const {
    if (values.empty()) return 0.0;
    const double u = t / dt;
    auto n = static_cast<std::ptrdiff_t>(std::floor(u));
    if (white_noise) {
      n = std::clamp<std::ptrdiff_t>(n, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
      return values[static_cast<std::size_t>(n)] / dt;
    }
    const auto last = static_cast<std::ptrdiff_t>(values.size()) - 1;
    if (n >= last) return values.back();
    if (n < 0) return values.front();
    const double w = u - static_cast<double>(n);
    return (1.0 - w) * values[static_cast<std::size_t>(n)] +
           w * values[static_cast<std::size_t>(n + 1)];
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed for stream `index` of an ensemble keyed by `master`.
/// Independent of the order in which streams are requested.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Incremental generator for one OU realization.  Produces exactly the values
/// `sample_path` would store, one at a time.
class OUStream {
 public:
  OUStream(const OUParams& p, double dt, std::uint64_t seed) : p_(p), dt_(dt), rng_(seed) {
    p.validate();
    detail::require(dt > 0.0, "dt must be positive");
    if (!p.white() && p.G > 0.0) {
      decay_ = std::exp(-dt / p.tau_c);
      kick_ = std::sqrt(p.G / p.tau_c * (-std::expm1(-2.0 * dt / p.tau_c)));
    } else if (p.white()) {
      kick_ = std::sqrt(2.0 * p.G * dt);
    }
  }

  /// First point value for colored noise, drawn from N(0, G / tau_c).
  double initial() {
    if (p_.white() || p_.G == 0.0) return 0.0;
    current_ = std::sqrt(p_.G / p_.tau_c) * normal_(rng_);
    return current_;
  }

  /// Next point value (colored) or next increment (white).
  double next() {
    if (p_.G == 0.0) return 0.0;
    if (p_.white()) return kick_ * normal_(rng_);
    current_ = current_ * decay_ + kick_ * normal_(rng_);
    return current_;
  }

  bool white() const noexcept { return p_.white(); }

 private:
  OUParams p_;
  double dt_;
  double decay_ = 1.0;
  double kick_ = 0.0;
  double current_ = 0.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Exact discretization of the OU process on a uniform grid.
inline NoisePath sample_path(const OUParams& p, double dt, std::size_t n_steps) {
  p.validate();
  detail::require(dt > 0.0, "dt must be positive");
  detail::require(n_steps >= 1, "n_steps must be >= 1");
  NoisePath path;
  path.dt = dt;
  path.white_noise = p.white();
  OUStream stream(p, dt, p.seed);
  if (path.white_noise) {
    path.values.resize(n_steps);
    for (auto& v : path.values) v = stream.next();
  } else {
    path.values.resize(n_steps + 1);
    path.values[0] = stream.initial();
    for (std::size_t n = 1; n <= n_steps; ++n) path.values[n] = stream.next();
  }
  return path;
}

struct LagEstimate {
  double lag = 0.0;  ///< lag time
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Ensemble autocorrelation <g(t) g(t + lag)>.  Each path contributes an
/// unbiased within-path average over its N - l pairs; the standard error comes
/// from the path-to-path scatter of those averages.
inline std::vector<LagEstimate> autocorrelation(std::span<const NoisePath> paths,
                                                std::size_t max_lag,
                                                std::size_t lag_stride = 1) {
  detail::require(paths.size() >= 2, "autocorrelation needs at least two paths");
  detail::require(lag_stride >= 1, "lag_stride must be >= 1");
  const std::size_t len = paths.front().values.size();
  for (const auto& p : paths) {
    if (p.values.size() != len || p.dt != paths.front().dt)
      throw std::invalid_argument("autocorrelation: paths differ in length or step");
  }
  detail::require(max_lag < len, "max_lag must be shorter than the paths");

  std::vector<LagEstimate> out;
  const auto n_paths = static_cast<double>(paths.size());
  for (std::size_t lag = 0; lag <= max_lag; lag += lag_stride) {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (const auto& p : paths) {
      const auto& v = p.values;
      double acc = 0.0;
      for (std::size_t n = 0; n + lag < len; ++n) acc += v[n] * v[n + lag];
      const double est = acc / static_cast<double>(len - lag);
      ++count;
      const double delta = est - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (est - mean);
    }
    const double var = m2 / (n_paths - 1.0);
    out.push_back({static_cast<double>(lag) * paths.front().dt, mean, std::sqrt(var / n_paths)});
  }
  return out;
}

/// One-sided spectral integral k_alpha = int_0^inf <g(t) g(t - s)> e^{i alpha Omega s} ds
/// = G (1 + i alpha Omega tau_c) / (1 + alpha^2 Omega^2 tau_c^2).
inline cplx spectral_k(const OUParams& p, double Omega, int alpha) {
  p.validate();
  detail::require(Omega > 0.0, "Omega must be positive");
  detail::require(alpha >= -1 && alpha <= 1, "alpha must be -1, 0 or +1");
  if (p.white()) return {p.G, 0.0};
  const double x = alpha * Omega * p.tau_c;
  return p.G * cplx{1.0, x} / (1.0 + x * x);
}

/// Finite-time version int_0^t (...) ds, used by the time-local second-order
/// kernel before the Markov extension of the upper limit.
inline cplx spectral_k_finite(const OUParams& p, double Omega, int alpha, double t) {
  if (p.white()) return t > 0.0 ? cplx{p.G, 0.0} : cplx{0.0, 0.0};
  const cplx rate{1.0 / p.tau_c, -alpha * Omega};
  return spectral_k(p, Omega, alpha) * (1.0 - std::exp(-rate * t));
}

}  // namespace oscq
