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

// Exponential-decay fits and rate comparisons.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "oscqubit/core.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {

struct FitResult {
  double rate = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double rate_stderr = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double quality = 0.0;  ///< weighted residual norm
  std::size_t n_points = 0;
};

struct FitOptions {
  /// Explicit window; when absent it is derived from rate_guess or the data range.
  std::optional<std::pair<double, double>> window;
  std::optional<double> rate_guess;
  /// Fit the envelope of an oscillating signal (peaks of |y|) instead of y.
  bool envelope_mode = false;
  /// Fit y = A exp(-k t) + c with c free.
  bool with_offset = false;
  /// Minimum number of samples inside the window.
  std::size_t min_points = 20;
  /// coherence_modulus only: average r+ over this period (a centred boxcar,
  /// applied twice) before taking the modulus.  Set it to 2*pi/Omega in the interaction
  /// picture to suppress the terms that rotate at the carrier.
  double carrier_period = 0.0;
  /// fit_observable only: weight by the trajectory's standard errors.  Turn it
  /// off when early points have near-zero error but carry a fast modulation
  /// the single-exponential model does not describe.
  bool use_errors = true;
  /// Pin the amplitude to the first sample of the series (not of the window)
  /// and fit the rate alone.  Much lower variance on ensemble means whose
  /// initial value is known exactly; incompatible with with_offset.
  bool anchored = false;
};

/// Window [0.5 / guess, 3 / guess] clipped to the data.
inline std::pair<double, double> default_window(std::span<const double> t, std::optional<double> guess) {
  detail::require(!t.empty(), "empty series");
  if (!guess || !(*guess > 0.0)) return {t.front(), t.back()};
  return {std::max(t.front(), 0.5 / *guess), std::min(t.back(), 3.0 / *guess)};
}

namespace detail {

struct Series {
  std::vector<double> t, y, s;
};

// Local maxima of |y| refined by a parabola through the three samples.
inline Series envelope_peaks(const Series& in) {
  Series out;
  const auto n = in.y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = std::abs(in.y[i - 1]);
    const double b = std::abs(in.y[i]);
    const double c = std::abs(in.y[i + 1]);
    if (!(b > a && b >= c)) continue;
    const double den = a - 2.0 * b + c;
    double shift = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    const double h = in.t[i + 1] - in.t[i];
    out.t.push_back(in.t[i] + shift * h);
    out.y.push_back(b - 0.25 * (a - c) * shift);
    out.s.push_back(in.s.empty() ? 0.0 : in.s[i]);
  }
  if (in.s.empty()) out.s.clear();
  return out;
}

inline void solve_weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                                const std::vector<double>& w, double& a, double& b,
                                Eigen::Matrix2d& normal) {
  normal.setZero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector2d row(1.0, x[i]);
    normal += w[i] * row * row.transpose();
    rhs += w[i] * y[i] * row;
  }
  const Eigen::Vector2d sol = normal.ldlt().solve(rhs);
  a = sol[0];
  b = sol[1];
}

}  // namespace detail

/// Least-squares fit of an exponential decay.  `sigma` (optional) holds
/// per-point standard errors of y; with it the covariance is taken as known,
/// without it the residual scatter sets the scale.
inline FitResult fit_exponential(std::span<const double> t, std::span<const double> y,
                                 const FitOptions& opt = {}, std::span<const double> sigma = {}) {
  detail::require(t.size() == y.size(), "time and value series differ in length");
  detail::require(sigma.empty() || sigma.size() == y.size(), "sigma length mismatch");
  const auto [t0, t1] = opt.window ? *opt.window : default_window(t, opt.rate_guess);
  if (!(t1 > t0)) throw std::invalid_argument("degenerate fit window");
  detail::require(t0 >= t.front() - 1e-12 && t1 <= t.back() + 1e-12, "fit window outside the data range");

  detail::Series raw;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    raw.t.push_back(t[i]);
    raw.y.push_back(y[i]);
    if (!sigma.empty()) raw.s.push_back(sigma[i]);
  }
  if (raw.t.size() < opt.min_points)
    throw std::invalid_argument("fit window holds fewer than " + std::to_string(opt.min_points) +
                                " points");
  detail::Series data = opt.envelope_mode ? detail::envelope_peaks(raw) : raw;
  if (data.t.size() < 3) throw std::invalid_argument("too few envelope peaks in the fit window");
  const bool known_sigma = !data.s.empty() &&
                           std::all_of(data.s.begin(), data.s.end(), [](double s) { return s > 0.0; });

  FitResult res;
  res.t_start = t0;
  res.t_end = t1;
  res.n_points = data.t.size();
  const std::size_t n = data.t.size();

  if (opt.anchored) {
    if (opt.with_offset) throw std::invalid_argument("anchored fits have no free offset");
    if (!(y.front() > 0.0)) throw std::invalid_argument("anchored fit needs a positive first sample");
    const double ta = t.front(), la = std::log(y.front());
    double sxx = 0.0, sxy = 0.0;
    std::vector<double> x(n), ly(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(data.y[i] > 0.0)) throw std::invalid_argument("non-positive value in anchored fit");
      x[i] = data.t[i] - ta;
      ly[i] = std::log(data.y[i]) - la;
      w[i] = known_sigma ? (data.y[i] / data.s[i]) * (data.y[i] / data.s[i]) : 1.0;
      sxx += w[i] * x[i] * x[i];
      sxy += w[i] * x[i] * ly[i];
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("anchored fit window has no spread in time");
    const double b = sxy / sxx;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) chi2 += w[i] * (ly[i] - b * x[i]) * (ly[i] - b * x[i]);
    double var = 1.0 / sxx;
    if (!known_sigma) var *= n > 1 ? chi2 / static_cast<double>(n - 1) : 0.0;
    res.rate = -b;
    res.amplitude = y.front();
    res.rate_stderr = std::sqrt(var);
    res.quality = std::sqrt(chi2);
    return res;
  }

  if (!opt.with_offset) {
    std::vector<double> ly(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(data.y[i] > 0.0))
        throw std::invalid_argument("non-positive value in log-linear fit (use envelope_mode or with_offset)");
      ly[i] = std::log(data.y[i]);
      w[i] = known_sigma ? (data.y[i] / data.s[i]) * (data.y[i] / data.s[i]) : 1.0;
    }
    double a = 0.0, b = 0.0;
    Eigen::Matrix2d normal;
    detail::solve_weighted_line(data.t, ly, w, a, b, normal);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - (a + b * data.t[i]);
      chi2 += w[i] * r * r;
    }
    Eigen::Matrix2d cov = normal.inverse();
    if (!known_sigma) cov *= n > 2 ? chi2 / static_cast<double>(n - 2) : 0.0;
    res.rate = -b;
    res.amplitude = std::exp(a);
    res.rate_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
    res.quality = std::sqrt(chi2);
    return res;
  }

  // y = A exp(-k t) + c: profile the rate, solve (A, c) linearly.
  std::vector<double> w(n, 1.0);
  if (known_sigma)
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (data.s[i] * data.s[i]);
  auto linear = [&](double k, double& A, double& c) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d row(std::exp(-k * (data.t[i] - t0)), 1.0);
      m += w[i] * row * row.transpose();
      rhs += w[i] * data.y[i] * row;
    }
    const Eigen::Vector2d sol = m.ldlt().solve(rhs);
    A = sol[0];
    c = sol[1];
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = data.y[i] - (A * std::exp(-k * (data.t[i] - t0)) + c);
      rss += w[i] * r * r;
    }
    return rss;
  };
  const double span_t = t1 - t0;
  const double k_hi = opt.rate_guess ? 20.0 * *opt.rate_guess : 50.0 / span_t;
  const double k_lo = opt.rate_guess ? 0.05 * *opt.rate_guess : 0.01 / span_t;
  double A = 0.0, c = 0.0;
  const auto best = boost::math::tools::brent_find_minima(
      [&](double k) { return linear(k, A, c); }, k_lo, k_hi, 52);
  const double k = best.first;
  const double rss = linear(k, A, c);
  Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-k * (data.t[i] - t0));
    const Eigen::Vector3d row(e, -A * (data.t[i] - t0) * e, 1.0);
    jtj += w[i] * row * row.transpose();
  }
  Eigen::Matrix3d cov = jtj.inverse();
  if (!known_sigma) cov *= n > 3 ? rss / static_cast<double>(n - 3) : 0.0;
  res.rate = k;
  res.amplitude = A * std::exp(k * t0);  // amplitude referred to t = 0
  res.offset = c;
  res.rate_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
  res.quality = std::sqrt(rss);
  return res;
}

/// Fit of a complex signal through its modulus.
inline FitResult fit_exponential(std::span<const double> t, std::span<const cplx> z,
                                 const FitOptions& opt = {}, std::span<const double> sigma = {}) {
  std::vector<double> mod(z.size());
  std::transform(z.begin(), z.end(), mod.begin(), [](cplx v) { return std::abs(v); });
  FitOptions o = opt;
  o.envelope_mode = false;
  return fit_exponential(t, std::span<const double>(mod), o, sigma);
}

/// Bloch observables convenient for fitting.
enum class Observable { rx, ry, rz, coherence_modulus };

struct ObservableSeries {
  std::vector<double> t, y, sigma;
};

inline ObservableSeries extract(const BlochTrajectory& tr, Observable obs) {
  ObservableSeries s;
  s.t = tr.times;
  const bool err = !tr.std_error.empty();
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const BlochVector& r = tr.r[k];
    switch (obs) {
      case Observable::rx:
      case Observable::ry:
      case Observable::rz: {
        const int i = static_cast<int>(obs);
        s.y.push_back(r[i]);
        if (err) s.sigma.push_back(tr.std_error[k][i]);
        break;
      }
      case Observable::coherence_modulus: {
        const double m = std::hypot(r.x(), r.y());
        s.y.push_back(m);
        if (err) {
          const BlochVector& e = tr.std_error[k];
          s.sigma.push_back(m > 0.0 ? std::hypot(r.x() * e.x(), r.y() * e.y()) / m
                                    : std::hypot(e.x(), e.y()));
        }
        break;
      }
    }
  }
  return s;
}

namespace detail {

// Boxcar of `w` samples applied twice (a triangular window of 2w - 1 samples),
// centred; the output is shorter by 2 * (w - 1) samples.
inline std::vector<double> double_boxcar(const std::vector<double>& v, std::size_t w) {
  std::vector<double> cur = v;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> out;
    double sum = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      sum += cur[k];
      if (k >= w) sum -= cur[k - w];
      if (k + 1 >= w) out.push_back(sum / static_cast<double>(w));
    }
    cur = std::move(out);
  }
  return cur;
}

// r+ averaged over one carrier period (twice) before taking the modulus.  The
// error of the average is taken as the centre-point error (conservative:
// neighbouring samples are correlated).
inline ObservableSeries averaged_coherence(const BlochTrajectory& tr, double period) {
  require(tr.size() >= 2, "series too short");
  const double dt = tr.times[1] - tr.times[0];
  const auto w = static_cast<std::size_t>(std::lround(period / dt));
  require(w >= 2 && 2 * w < tr.size(), "carrier_period must span 2 samples and fit twice in the series");
  std::vector<double> x(tr.size()), y(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    x[k] = tr.r[k].x();
    y[k] = tr.r[k].y();
  }
  const std::vector<double> xs = double_boxcar(x, w), ys = double_boxcar(y, w);
  const std::size_t shift = w - 1;  // centre of the triangular window
  const bool err = !tr.std_error.empty();
  ObservableSeries s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t c = i + shift;
    const double m = std::hypot(xs[i], ys[i]);
    s.t.push_back(tr.times[c]);
    s.y.push_back(m);
    if (err) {
      const BlochVector& e = tr.std_error[c];
      s.sigma.push_back(m > 0.0 ? std::hypot(xs[i] * e.x(), ys[i] * e.y()) / m : std::hypot(e.x(), e.y()));
    }
  }
  return s;
}

}  // namespace detail

inline FitResult fit_observable(const BlochTrajectory& tr, Observable obs, const FitOptions& opt = {}) {
  const ObservableSeries s = (obs == Observable::coherence_modulus && opt.carrier_period > 0.0)
                                 ? detail::averaged_coherence(tr, opt.carrier_period)
                                 : extract(tr, obs);
  const std::span<const double> sigma =
      opt.use_errors ? std::span<const double>(s.sigma) : std::span<const double>();
  if (obs == Observable::rz || !opt.envelope_mode) {
    // rz decays without oscillation; use |rz| in case the sign convention makes it negative
    std::vector<double> y = s.y;
    if (!opt.with_offset && !opt.envelope_mode && !y.empty() && y.front() < 0.0)
      for (double& v : y) v = -v;
    return fit_exponential(s.t, std::span<const double>(y), opt, sigma);
  }
  return fit_exponential(s.t, std::span<const double>(s.y), opt, sigma);
}

struct RateComparison {
  bool pass = false;
  double measured = 0.0;
  double reference = 0.0;
  double rel_diff = 0.0;
  double z = 0.0;  ///< difference in pooled standard errors (0 when none are known)
  double tol = 0.0;
};

/// Relative comparison against an analytic value.
inline RateComparison compare_rates(const FitResult& fit, double analytic, double tol) {
  detail::require(tol >= 0.0, "tol must be >= 0");
  RateComparison c;
  c.measured = fit.rate;
  c.reference = analytic;
  c.tol = tol;
  const double scale = std::max(std::abs(analytic), std::numeric_limits<double>::min());
  c.rel_diff = std::abs(fit.rate - analytic) / scale;
  c.z = fit.rate_stderr > 0.0 ? (fit.rate - analytic) / fit.rate_stderr : 0.0;
  c.pass = c.rel_diff <= tol;
  return c;
}

/// Two fitted rates, pooled uncertainty.
inline RateComparison compare_rates(const FitResult& a, const FitResult& b, double tol) {
  RateComparison c = compare_rates(a, b.rate, tol);
  const double pooled = std::hypot(a.rate_stderr, b.rate_stderr);
  c.z = pooled > 0.0 ? (a.rate - b.rate) / pooled : 0.0;
  return c;
}

inline std::string format_comparison(const std::string& name, const RateComparison& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s measured=%.6g reference=%.6g rel_diff=%.3g tol=%.3g z=%.3g",
                c.pass ? "PASS" : "FAIL", name.c_str(), c.measured, c.reference, c.rel_diff, c.tol, c.z);
  return buf;
}

}  // namespace oscq
